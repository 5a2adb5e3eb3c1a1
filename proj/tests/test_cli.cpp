#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace
{

struct Run {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("exoseries_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

Run run(const std::string& args, const fs::path& dir)
{
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + EXOSERIES_CLI + "\" " + args + " > \"" + out.string() + "\" 2> \""
                            + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, slurp(out), slurp(err)};
}

// archive reals are numbers, or decimal strings in wide-Real builds
double real_of(const json& v) { return v.is_string() ? std::stod(v.get<std::string>()) : v.get<double>(); }

std::string config(const std::string& name) { return std::string("\"") + EXOSERIES_CONFIG_DIR + "/" + name + "\""; }

fs::path write_variant(const fs::path& dir, const std::string& name, const std::function<void(json&)>& edit)
{
    json j = json::parse(slurp(fs::path(EXOSERIES_CONFIG_DIR) / "p3.conf"));
    edit(j);
    const fs::path p = dir / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

} // namespace

TEST_CASE("certify writes a certified report")
{
    const fs::path d = scratch("certify");
    const Run r = run("certify " + config("p3.conf") + " --out-dir \"" + d.string() + "\"", d);
    CHECK(r.code == 0);
    CHECK(r.err.find("verdict: certified") != std::string::npos);
    REQUIRE(fs::exists(d / "p3_report.json"));
    CHECK(fs::exists(d / "p3_report.json.meta.json"));
    CHECK(fs::exists(d / "p3_coefficients.csv"));
    CHECK(fs::exists(d / "p3_norms.csv"));
    const json rep = json::parse(slurp(d / "p3_report.json"));
    CHECK(rep["verdict"] == "certified");
    CHECK(rep["truncation"]["K"] == 30);
}

TEST_CASE("reports are byte-identical across runs")
{
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(run("run " + config("p3.conf") + " --out-dir \"" + a.string() + "\"", a).code == 0);
    REQUIRE(run("run " + config("p3.conf") + " --out-dir \"" + b.string() + "\"", b).code == 0);
    CHECK(slurp(a / "p3_report.json") == slurp(b / "p3_report.json"));
    CHECK(slurp(a / "p3_coefficients.csv") == slurp(b / "p3_coefficients.csv"));
}

TEST_CASE("check prints the condition data")
{
    const fs::path d = scratch("check");
    const Run r = run("check " + config("p3.conf"), d);
    CHECK(r.code == 0);
    CHECK(r.out.find("condition: ok") != std::string::npos);
    CHECK(r.out.find("m = -1, ord_a = [1,1,1]") != std::string::npos);
}

TEST_CASE("invalid configurations are rejected with the field path")
{
    const fs::path d = scratch("schema");
    const fs::path g0 = write_variant(d, "gamma0.conf", [](json& j) { j["gamma"] = 0; });
    Run r = run("certify \"" + g0.string() + "\"", d);
    CHECK(r.code == 1);
    CHECK(r.err.find("error [config]: gamma: must be a nonzero real") != std::string::npos);

    const fs::path rr = write_variant(d, "norm.conf", [](json& j) { j["norm"] = {{"r", 0.2}, {"R", 0.1}}; });
    r = run("certify \"" + rr.string() + "\"", d);
    CHECK(r.code == 1);
    CHECK(r.err.find("norm: requires 0 < r < R") != std::string::npos);

    const fs::path eq = write_variant(d, "eq.conf", [](json& j) { j["norm"] = {{"r", 0.2}, {"R", 0.2}}; });
    r = run("check \"" + eq.string() + "\"", d);
    CHECK(r.code == 1);

    r = run("certify \"" + (d / "nope.conf").string() + "\"", d);
    CHECK(r.code == 1);
    r = run("", d);
    CHECK(r.code == 1);
}

TEST_CASE("eval refuses points outside the certified sector")
{
    const fs::path d = scratch("eval");
    // sector for r = 0.088, R = 0.176, gamma = 1 is about (1.737, 2.430)
    Run r = run("eval " + config("p3.conf") + " --abs 0.1 --arg 0.5", d);
    CHECK(r.code == 1);
    CHECK(r.err.find("refused") != std::string::npos);

    r = run("eval " + config("p3.conf") + " --abs 5 --arg 2.0", d);
    CHECK(r.code == 1);
    CHECK(r.err.find("refused") != std::string::npos);

    r = run("eval " + config("p3.conf") + " --abs 0.1 --arg 2.0", d);
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.contains("y"));
}

TEST_CASE("resumed solve reproduces the stored coefficients")
{
    const fs::path d = scratch("resume");
    const std::string common = config("p3.conf") + " --out-dir \"" + d.string() + "\" --archive arch.json";
    Run r = run("solve " + common + " --K 10", d);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("resumed: no") != std::string::npos);
    const json first = json::parse(slurp(d / "arch.json"));
    REQUIRE(first["c"].size() == 10);

    r = run("solve " + common + " --K 20 --resume", d);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("resumed: yes") != std::string::npos);
    const json second = json::parse(slurp(d / "arch.json"));
    REQUIRE(second["c"].size() == 20);
    for (std::size_t k = 0; k < 10; ++k) CHECK(second["c"][k] == first["c"][k]);

    // a fresh run to K = 20 agrees with the resumed one
    const fs::path e = scratch("resume_fresh");
    REQUIRE(run("solve " + config("p3.conf") + " --out-dir \"" + e.string() + "\" --archive arch.json --K 20", e).code == 0);
    // the fresh run starts from a wider t-window; both agree below t^{L_base + 1}
    const json fresh = json::parse(slurp(e / "arch.json"))["c"];
    REQUIRE(fresh.size() == 20);
    for (std::size_t k = 0; k < 20; ++k) {
        const json& u = fresh[k];
        const json& v = second["c"][k];
        CHECK(u["lead"] == v["lead"]);
        for (std::size_t i = 0; i < u["coeffs"].size() && int(i) + u["lead"].get<int>() < 41; ++i) {
            const double ur = real_of(u["coeffs"][i][0]), ui = real_of(u["coeffs"][i][1]);
            const double vr = real_of(v["coeffs"][i][0]), vi = real_of(v["coeffs"][i][1]);
            CHECK(std::hypot(ur - vr, ui - vi) <= 1e-9 * std::max(1.0, std::hypot(vr, vi)));
        }
    }

    // an archive from a different configuration is refused
    const fs::path other = write_variant(d, "other.conf", [](json& j) { j["params"]["b"] = 2; });
    r = run("solve \"" + other.string() + "\" --out-dir \"" + d.string() + "\" --archive arch.json --resume", d);
    CHECK(r.code == 1);
    CHECK(r.err.find("different configuration") != std::string::npos);
}

TEST_CASE("linear example and demo")
{
    const fs::path d = scratch("linear");
    Run r = run("certify " + config("linear.conf") + " --out-dir \"" + d.string() + "\"", d);
    CHECK(r.code == 0);
    const json rep = json::parse(slurp(d / "linear_report.json"));
    CHECK(rep["verdict"] == "certified");

    r = run("demo p3 --K 12 --L-base 20 --gamma 2", d);
    CHECK(r.code == 0);
    CHECK(json::parse(r.out)["verdict"] == "certified");
}
