// Command-line front end: check, solve, certify/run, eval, demo p3.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <exoseries/certify.hpp>
#include <exoseries/io.hpp>
#include <exoseries/painleve3.hpp>

namespace fs = std::filesystem;
using namespace exoseries;

namespace
{

int exit_code(Verdict v)
{
    switch (v) {
    case Verdict::certified: return 0;
    case Verdict::condition_failed: return 2;
    case Verdict::inconclusive: return 3;
    }
    return 3;
}

fs::path resolve(const std::string& out_dir, const std::string& p)
{
    const fs::path path = fs::path(p).is_absolute() || out_dir.empty() ? fs::path(p) : fs::path(out_dir) / p;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    return path;
}

std::string ord_list(const std::vector<std::optional<int>>& ord)
{
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < ord.size(); ++i) {
        if (i) os << ',';
        if (ord[i])
            os << *ord[i];
        else
            os << "inf";
    }
    os << ']';
    return os.str();
}

void write_text(const fs::path& path, const std::string& what, const std::function<void(std::ostream&)>& body)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write " + what + " " + path.string());
    body(out);
}

struct Common {
    std::string config;
    std::string out_dir;
    int K = 0;
};

RunConfig load(const Common& c)
{
    RunConfig cfg = load_config(c.config);
    if (c.K > 0) cfg.K = c.K;
    return cfg;
}

int run_check(const Common& c)
{
    const RunConfig cfg = load(c);
    const OdeExpr f = config_equation(cfg);
    const ExoticSeries prefix = config_prefix(cfg)(cfg.L_base + cfg.K + 8);
    const ConditionResult res = check_condition(f, prefix, cfg.tol);
    const char* status = res.ok() ? "ok" : res.status == ConditionStatus::failed ? "failed" : "inconclusive";
    std::cout << "condition: " << status << "\n";
    std::cout << "m = " << res.m << ", ord_a = " << ord_list(res.ord_a) << "\n";
    if (!res.detail.empty()) std::cout << "detail: " << res.detail << "\n";
    if (res.ok()) return 0;
    return res.status == ConditionStatus::failed ? 2 : 3;
}

int run_solve(const Common& c, const std::string& archive_opt, bool resume, const std::string& csv_opt)
{
    const RunConfig cfg = load(c);
    const OdeExpr f = config_equation(cfg);
    std::string archive_name = archive_opt.empty() ? cfg.archive_path : archive_opt;
    if (archive_name.empty()) archive_name = fs::path(c.config).stem().string() + ".archive.json";
    const fs::path archive_path = resolve(c.out_dir, archive_name);
    const std::uint64_t fp = fingerprint(cfg);

    std::optional<ResumeData> data;
    if (resume && fs::exists(archive_path)) {
        const Archive a = load_archive(archive_path);
        if (a.fingerprint != fp) throw Error("cli", "archive " + archive_path.string() + " was produced by a different configuration");
        data = ResumeData{a.input_trunc, a.c, a.forward, a.err};
    }

    const CertifyResult res = solve_stage(f, config_prefix(cfg), certify_config(cfg), data);
    const ConvergenceReport& rep = res.report;
    if (!res.state) {
        std::cout << "condition: " << to_string(rep.verdict) << " (" << rep.condition_detail << ")\n";
        return exit_code(rep.verdict);
    }
    const RecursionState& state = *res.state;
    Archive a;
    a.fingerprint = fp;
    a.input_trunc = rep.input_trunc;
    a.N = rep.N;
    for (int k = 1; k <= state.solved_through(); ++k) {
        a.c.push_back(state.c(k));
        a.forward.push_back(state.forward_residual(k));
        a.err.push_back(state.error_bound(k));
    }
    save_archive(a, archive_path);

    const std::string csv_name = csv_opt.empty() ? cfg.coefficients_csv : csv_opt;
    if (!csv_name.empty())
        write_text(resolve(c.out_dir, csv_name), "coefficient CSV", [&](std::ostream& os) { write_coefficients_csv(os, state); });

    std::cout << "m = " << rep.m << ", N = " << rep.N << ", mu = " << rep.mu << ", K = " << state.solved_through()
              << ", input t-window = " << rep.input_trunc << ", min precision = " << rep.min_precision << "\n";
    std::cout << "resumed: " << (data && data->input_trunc == rep.input_trunc ? "yes" : "no") << "\n";
    std::cout << "archive: " << archive_path.string() << "\n";
    return 0;
}

void emit_outputs(const Common& c, const RunConfig& cfg, const CertifyResult& res, const std::string& report_opt)
{
    const json body = to_json(res.report);
    const std::string report_name = report_opt.empty() ? cfg.report_path : report_opt;
    if (report_name.empty() || report_name == "-")
        std::cout << body.dump(2) << "\n";
    else
        write_report(body, resolve(c.out_dir, report_name));
    if (res.state && !cfg.coefficients_csv.empty())
        write_text(resolve(c.out_dir, cfg.coefficients_csv), "coefficient CSV",
                   [&](std::ostream& os) { write_coefficients_csv(os, *res.state); });
    if (!cfg.norms_csv.empty())
        write_text(resolve(c.out_dir, cfg.norms_csv), "norm CSV", [&](std::ostream& os) { write_norms_csv(os, res.report); });
}

int run_certify(const Common& c, const std::string& report_opt)
{
    const RunConfig cfg = load(c);
    const CertifyResult res = certify(config_equation(cfg), config_prefix(cfg), certify_config(cfg));
    emit_outputs(c, cfg, res, report_opt);
    std::cerr << "verdict: " << to_string(res.report.verdict) << "\n";
    return exit_code(res.report.verdict);
}

int run_eval(const Common& c, double modulus, double arg)
{
    const RunConfig cfg = load(c);
    const CertifyResult res = certify(config_equation(cfg), config_prefix(cfg), certify_config(cfg));
    const ConvergenceReport& rep = res.report;
    if (rep.verdict != Verdict::certified) {
        std::cerr << "refused: no certified domain (verdict " << to_string(rep.verdict) << ")\n";
        return 1;
    }
    const SectorSpec sector(rep.arg_lo, rep.arg_hi, rep.radius);
    const XPoint x{modulus, arg};
    try {
        const ExoticSeries y = res.solution->truncated(rep.N + rep.K);
        const Complex v = eval_at(y, x, sector);
        const json out{{"x", {{"modulus", modulus}, {"arg", arg}}},
                       {"t", complex_to_json(exotic_t(x, rep.gamma))},
                       {"y", complex_to_json(v)},
                       {"K", rep.K},
                       {"sector", {{"arg_lo", static_cast<double>(rep.arg_lo)}, {"arg_hi", static_cast<double>(rep.arg_hi)},
                                   {"radius", static_cast<double>(rep.radius)}}}};
        std::cout << out.dump(2) << "\n";
        return 0;
    } catch (const OutsideDomain& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 1;
    }
}

int run_demo(const P3Params& p, int K, int L_base)
{
    const CertifyResult res = p3_demo(p, K, L_base);
    std::cout << to_json(res.report).dump(2) << "\n";
    return exit_code(res.report.verdict);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exotic series solutions of ODEs in Euler-operator form: reduction, coefficient recursion and convergence diagnostics"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", common.config, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out-dir", common.out_dir, "directory for relative output paths");
        sub->add_option("--K", common.K, "override the x-truncation K")->check(CLI::PositiveNumber);
    };

    auto* check = app.add_subcommand("check", "check the leading-coefficient condition along the prefix");
    add_common(check);

    std::string archive, csv;
    bool resume = false;
    auto* solve = app.add_subcommand("solve", "compute c_1..c_K and write the coefficient archive");
    add_common(solve);
    solve->add_option("--archive", archive, "archive path (default from config)");
    solve->add_flag("--resume", resume, "extend the coefficients stored in the archive");
    solve->add_option("--csv", csv, "coefficient CSV path");

    std::string report;
    auto* cert = app.add_subcommand("certify", "full pipeline with convergence diagnostics");
    cert->alias("run");
    add_common(cert);
    cert->add_option("--report", report, "report path ('-' for stdout)");

    double modulus = 0, arg = 0;
    auto* eval = app.add_subcommand("eval", "evaluate the certified solution at x = abs * exp(i arg)");
    add_common(eval);
    eval->add_option("--abs", modulus, "|x|")->required();
    eval->add_option("--arg", arg, "arg x (branch of log x)")->required();

    P3Params p3;
    double C_re = 1, C_im = 0, a = 1, b = 1, c = 1, d = 1;
    int demo_K = 30, demo_L = 40;
    auto* demo = app.add_subcommand("demo", "bundled demonstrations");
    auto* demo_p3 = demo->add_subcommand("p3", "third Painleve equation, exotic family");
    demo->require_subcommand(1);
    demo_p3->add_option("--gamma", p3.gamma, "gamma (nonzero)");
    demo_p3->add_option("--C-re", C_re, "Re C");
    demo_p3->add_option("--C-im", C_im, "Im C");
    demo_p3->add_option("--a", a);
    demo_p3->add_option("--b", b);
    demo_p3->add_option("--c", c);
    demo_p3->add_option("--d", d);
    demo_p3->add_option("--K", demo_K)->check(CLI::PositiveNumber);
    demo_p3->add_option("--L-base", demo_L)->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*check) return run_check(common);
        if (*solve) return run_solve(common, archive, resume, csv);
        if (*cert) return run_certify(common, report);
        if (*eval) return run_eval(common, modulus, arg);
        if (*demo_p3) {
            p3.C = Complex(C_re, C_im);
            p3.a = a;
            p3.b = b;
            p3.c = c;
            p3.d = d;
            return run_demo(p3, demo_K, demo_L);
        }
    } catch (const Error& e) {
        std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
