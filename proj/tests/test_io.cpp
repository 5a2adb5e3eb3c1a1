#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <exoseries/io.hpp>
#include <exoseries/painleve3.hpp>

using namespace exoseries;
namespace fs = std::filesystem;

namespace
{

json base_config()
{
    return json::parse(R"({
        "schema_version": 1,
        "ode": "y1 + y0 - x*t^-1*y0 - x",
        "gamma": 1,
        "prefix": [],
        "K": 12,
        "L_base": 4,
        "norm": {"r": 0.25, "R": 0.5}
    })");
}

std::string schema_path(const json& j)
{
    try {
        parse_config(j);
    } catch (const SchemaError& e) {
        return e.path();
    }
    return "<accepted>";
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("minimal configuration is accepted")
{
    const RunConfig cfg = parse_config(base_config());
    CHECK(cfg.K == 12);
    CHECK(cfg.r == 0.25);
    CHECK(cfg.prefix.empty());
    CHECK(cfg.params.at("gamma") == Complex(1));
}

TEST_CASE("schema errors name the offending field")
{
    json j = base_config();
    j["gamma"] = 0;
    CHECK(schema_path(j) == "gamma");

    j = base_config();
    j["norm"]["r"] = 0.5;
    CHECK(schema_path(j) == "norm");

    j = base_config();
    j["norm"]["r"] = 0.7;
    CHECK(schema_path(j) == "norm");

    j = base_config();
    j.erase("ode");
    CHECK(schema_path(j) == "ode");

    j = base_config();
    j["extra"] = 1;
    CHECK(schema_path(j) == "extra");

    j = base_config();
    j["K"] = 0;
    CHECK(schema_path(j) == "K");

    j = base_config();
    j["K"] = 2.5;
    CHECK(schema_path(j) == "K");

    j = base_config();
    j["ode"] = "y1 + q";
    CHECK(schema_path(j) == "ode");

    j = base_config();
    j["prefix"] = json::parse(R"([{"k": -1, "rational": {"num": "t", "den": "0*t"}}])");
    CHECK(schema_path(j) == "prefix[0].rational.den");

    j = base_config();
    j["prefix"] = json::parse(R"([{"k": 0, "coeffs": [1]}, {"k": 0, "coeffs": [2]}])");
    CHECK(schema_path(j) == "prefix[1].k");

    j = base_config();
    j["prefix"] = json::parse(R"([{"k": 0}])");
    CHECK(schema_path(j) == "prefix[0]");

    j = base_config();
    j["schema_version"] = 2;
    CHECK(schema_path(j) == "schema_version");

    j = base_config();
    j["params"] = {{"gamma", 2}};
    CHECK(schema_path(j) == "params.gamma");
}

TEST_CASE("bundled configurations parse")
{
    const RunConfig p3 = load_config(fs::path(EXOSERIES_CONFIG_DIR) / "p3.conf");
    CHECK(p3.prefix.size() == 1);
    CHECK(p3.prefix[0].rational);
    const ExoticSeries prefix = config_prefix(p3)(30);
    const LaurentPoly want = p3_leading_coefficient(P3Params{}, 30);
    CHECK(max_abs(prefix.term(-1) - want) < 1e-14);

    const RunConfig lin = load_config(fs::path(EXOSERIES_CONFIG_DIR) / "linear.conf");
    CHECK(config_prefix(lin)(10).is_zero());
    CHECK_THROWS_AS(load_config(fs::path(EXOSERIES_CONFIG_DIR) / "missing.conf"), Error);
}

TEST_CASE("FNV-1a reference values")
{
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(hex64(0xcbf29ce484222325ULL) == "cbf29ce484222325");
}

TEST_CASE("fingerprint ignores K but not the equation")
{
    RunConfig a = parse_config(base_config());
    RunConfig b = a;
    b.K = 40;
    CHECK(fingerprint(a) == fingerprint(b));
    b.ode = "y1 + y0 - x";
    CHECK(fingerprint(a) != fingerprint(b));
}

TEST_CASE("complex and Laurent round trips")
{
    CHECK(complex_from_json(complex_to_json(Complex(1.25, -3)), "z") == Complex(1.25, -3));
    CHECK(complex_from_json(json(2.5), "z") == Complex(2.5));
    CHECK_THROWS_AS(complex_from_json(json("x"), "z"), SchemaError);

    const LaurentPoly f(-3, {Complex(0.1, 0.2), Complex(1.0 / 3, 0), Complex(0, -7e-17)}, 12);
    const LaurentPoly g = laurent_from_json(to_json(f));
    CHECK(g == f);
    CHECK(g.precision() == 12);
    const LaurentPoly e = laurent_from_json(to_json(LaurentPoly::constant(2)));
    CHECK(e.is_exact());
}

TEST_CASE("archive round trip")
{
    const P3Params p;
    const ReducedEquation eq = reduce(p3_equation(p), p3_leading(p, 60), 0);
    const RecursionState s = solve_through(eq, 6, p3_default_norm(p));
    Archive a;
    a.fingerprint = 0x1234abcdULL;
    a.input_trunc = 60;
    a.N = 0;
    for (int k = 1; k <= 6; ++k) {
        a.c.push_back(s.c(k));
        a.forward.push_back(s.forward_residual(k));
        a.err.push_back(s.error_bound(k));
    }
    const fs::path path = fs::temp_directory_path() / "exoseries_test_archive.json";
    save_archive(a, path);
    const Archive b = load_archive(path);
    CHECK(b.fingerprint == a.fingerprint);
    CHECK(b.input_trunc == 60);
    REQUIRE(b.c.size() == 6);
    for (int k = 0; k < 6; ++k) {
        CHECK(b.c[static_cast<std::size_t>(k)] == a.c[static_cast<std::size_t>(k)]);
        CHECK(b.forward[static_cast<std::size_t>(k)] == a.forward[static_cast<std::size_t>(k)]);
        CHECK(b.err[static_cast<std::size_t>(k)] == a.err[static_cast<std::size_t>(k)]);
    }
    fs::remove(path);
    CHECK_THROWS_AS(archive_from_json(json::object()), SchemaError);
}

TEST_CASE("reports are deterministic")
{
    const P3Params p;
    const CertifyResult r1 = p3_demo(p, 12, 20);
    const CertifyResult r2 = p3_demo(p, 12, 20);
    const json j1 = to_json(r1.report);
    CHECK(j1.dump() == to_json(r2.report).dump());
    CHECK(j1["schema"] == "exoseries.report");
    CHECK(j1["verdict"] == "certified");

    const fs::path dir = fs::temp_directory_path() / "exoseries_test_reports";
    fs::create_directories(dir);
    write_report(j1, dir / "a.json");
    write_report(to_json(r2.report), dir / "b.json");
    CHECK(read_file(dir / "a.json") == read_file(dir / "b.json"));
    CHECK(fs::exists(dir / "a.json.meta.json"));
    const json meta = json::parse(read_file(dir / "a.json.meta.json"));
    CHECK(meta["body_fnv1a64"] == hex64(fnv1a64(read_file(dir / "a.json"))));
    fs::remove_all(dir);
}

TEST_CASE("csv writers")
{
    const P3Params p;
    const CertifyResult r = p3_demo(p, 6, 10);
    std::ostringstream c, n;
    write_coefficients_csv(c, *r.state);
    write_norms_csv(n, r.report);
    CHECK(c.str().rfind("k,exponent,re,im\n", 0) == 0);
    CHECK(n.str().rfind("k,norm\n", 0) == 0);
    int lines = 0;
    for (char ch : n.str()) lines += ch == '\n';
    CHECK(lines == 7);
}
