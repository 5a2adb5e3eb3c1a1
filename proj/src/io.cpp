#include <exoseries/io.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace exoseries
{

namespace
{

std::string join(const std::string& base, const std::string& key)
{
    return base.empty() ? key : base + "." + key;
}

std::string index_path(const std::string& base, std::size_t i)
{
    return base + "[" + std::to_string(i) + "]";
}

const json& require(const json& obj, const std::string& key, const std::string& base)
{
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(join(base, key), "required field is missing");
    return *it;
}

int as_int(const json& v, const std::string& path)
{
    if (!v.is_number_integer()) throw SchemaError(path, "must be an integer");
    const auto x = v.get<long long>();
    if (x < -1000000 || x > 1000000) throw SchemaError(path, "integer out of range");
    return static_cast<int>(x);
}

Real as_real(const json& v, const std::string& path)
{
    Real x;
    if (v.is_number()) {
        x = v.get<double>();
    } else if (v.is_string() && sizeof(Real) > sizeof(double)) {
        // full-width decimal written by wide builds
        const std::string& s = v.get_ref<const std::string&>();
        std::size_t used = 0;
        try {
            x = std::stold(s, &used);
        } catch (const std::exception&) {
            throw SchemaError(path, "must be a number");
        }
        if (used != s.size()) throw SchemaError(path, "must be a number");
    } else {
        throw SchemaError(path, "must be a number");
    }
    if (!std::isfinite(x)) throw SchemaError(path, "must be finite");
    return x;
}

json real_to_json(Real x)
{
    if constexpr (sizeof(Real) > sizeof(double)) {
        if (static_cast<Real>(static_cast<double>(x)) != x) {
            std::ostringstream os;
            os << std::setprecision(std::numeric_limits<Real>::max_digits10) << x;
            return os.str();
        }
    }
    return static_cast<double>(x);
}

Real as_positive(const json& v, const std::string& path)
{
    const Real x = as_real(v, path);
    if (!(x > 0)) throw SchemaError(path, "must be positive");
    return x;
}

std::string as_string(const json& v, const std::string& path)
{
    if (!v.is_string()) throw SchemaError(path, "must be a string");
    return v.get<std::string>();
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& base)
{
    if (!obj.is_object()) throw SchemaError(base.empty() ? "(root)" : base, "must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw SchemaError(join(base, it.key()), "unknown field");
}

LaurentPoly entry_value(const PrefixEntry& e, const ParamMap& params, int trunc_L)
{
    if (!e.rational) return LaurentPoly(e.lead, e.coeffs, e.precision);
    const LaurentPoly num = expand_in_t(parse_expression(e.num, params));
    const LaurentPoly den = expand_in_t(parse_expression(e.den, params));
    if (den.is_zero()) throw Error("config", "prefix denominator is identically zero");
    return divide(num, den, trunc_L);
}

json prefix_json(const RunConfig& cfg)
{
    json arr = json::array();
    for (const auto& e : cfg.prefix) {
        json j{{"k", e.k}};
        if (e.rational) {
            j["rational"] = {{"num", e.num}, {"den", e.den}};
        } else {
            j["lead"] = e.lead;
            json cs = json::array();
            for (const auto& c : e.coeffs) cs.push_back(complex_to_json(c));
            j["coeffs"] = cs;
            j["precision"] = e.precision >= kExact ? json(nullptr) : json(e.precision);
        }
        arr.push_back(j);
    }
    return arr;
}

json optional_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

json exact_or(int v) { return v >= kExact ? json(nullptr) : json(v); }

} // namespace

json complex_to_json(Complex c) { return json::array({real_to_json(c.real()), real_to_json(c.imag())}); }

Complex complex_from_json(const json& j, const std::string& path)
{
    if (j.is_number()) return Complex(as_real(j, path));
    if (j.is_array() && j.size() == 2) return Complex(as_real(j[0], path + "[0]"), as_real(j[1], path + "[1]"));
    throw SchemaError(path, "must be a number or a [re, im] pair");
}

RunConfig parse_config(const json& j)
{
    check_keys(j,
               {"schema_version", "ode", "params", "gamma", "prefix", "prefix_k_max", "K", "L_base", "norm",
                "tolerances", "radius_cap", "samples", "output", "comment"},
               "");
    RunConfig cfg;
    cfg.schema_version = as_int(require(j, "schema_version", ""), "schema_version");
    if (cfg.schema_version != kConfigSchemaVersion)
        throw SchemaError("schema_version", "unsupported version " + std::to_string(cfg.schema_version));

    cfg.ode = as_string(require(j, "ode", ""), "ode");
    if (cfg.ode.empty()) throw SchemaError("ode", "must not be empty");

    cfg.gamma = as_real(require(j, "gamma", ""), "gamma");
    if (cfg.gamma == 0) throw SchemaError("gamma", "must be a nonzero real");

    if (auto it = j.find("params"); it != j.end()) {
        if (!it->is_object()) throw SchemaError("params", "must be an object");
        for (auto p = it->begin(); p != it->end(); ++p) cfg.params[p.key()] = complex_from_json(p.value(), "params." + p.key());
    }
    if (auto g = cfg.params.find("gamma"); g != cfg.params.end() && g->second != Complex(cfg.gamma))
        throw SchemaError("params.gamma", "conflicts with gamma");
    cfg.params["gamma"] = Complex(cfg.gamma);

    try {
        parse_ode(cfg.ode, cfg.params);
    } catch (const Error& e) {
        throw SchemaError("ode", e.what());
    }

    if (auto it = j.find("prefix"); it != j.end()) {
        if (!it->is_array()) throw SchemaError("prefix", "must be an array");
        std::set<int> seen;
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& e = (*it)[i];
            const std::string base = index_path("prefix", i);
            check_keys(e, {"k", "rational", "lead", "coeffs", "precision"}, base);
            PrefixEntry pe;
            pe.k = as_int(require(e, "k", base), join(base, "k"));
            if (!seen.insert(pe.k).second) throw SchemaError(join(base, "k"), "duplicate grade");
            const bool has_rational = e.contains("rational");
            const bool has_coeffs = e.contains("coeffs");
            if (has_rational == has_coeffs) throw SchemaError(base, "needs exactly one of 'rational' or 'coeffs'");
            if (has_rational) {
                const json& r = e["rational"];
                const std::string rb = join(base, "rational");
                check_keys(r, {"num", "den"}, rb);
                pe.rational = true;
                pe.num = as_string(require(r, "num", rb), join(rb, "num"));
                pe.den = r.contains("den") ? as_string(r["den"], join(rb, "den")) : "1";
                for (const auto& [field, text] : {std::pair{"num", pe.num}, std::pair{"den", pe.den}}) {
                    try {
                        expand_in_t(parse_expression(text, cfg.params));
                    } catch (const Error& ex) {
                        throw SchemaError(join(rb, field), ex.what());
                    }
                }
                if (expand_in_t(parse_expression(pe.den, cfg.params)).is_zero())
                    throw SchemaError(join(rb, "den"), "denominator is identically zero");
            } else {
                const json& cs = e["coeffs"];
                if (!cs.is_array()) throw SchemaError(join(base, "coeffs"), "must be an array");
                for (std::size_t q = 0; q < cs.size(); ++q)
                    pe.coeffs.push_back(complex_from_json(cs[q], index_path(join(base, "coeffs"), q)));
                pe.lead = e.contains("lead") ? as_int(e["lead"], join(base, "lead")) : 0;
                if (e.contains("precision") && !e["precision"].is_null())
                    pe.precision = as_int(e["precision"], join(base, "precision"));
            }
            cfg.prefix.push_back(std::move(pe));
        }
    }
    if (auto it = j.find("prefix_k_max"); it != j.end() && !it->is_null())
        cfg.prefix_k_max = as_int(*it, "prefix_k_max");

    if (auto it = j.find("K"); it != j.end()) cfg.K = as_int(*it, "K");
    if (cfg.K < 1) throw SchemaError("K", "must be at least 1");
    if (auto it = j.find("L_base"); it != j.end()) cfg.L_base = as_int(*it, "L_base");
    if (cfg.L_base < 1) throw SchemaError("L_base", "must be at least 1");

    if (auto it = j.find("norm"); it != j.end()) {
        check_keys(*it, {"r", "R"}, "norm");
        cfg.r = as_real(require(*it, "r", "norm"), "norm.r");
        cfg.R = as_real(require(*it, "R", "norm"), "norm.R");
    }
    if (!(cfg.r > 0)) throw SchemaError("norm.r", "must be positive");
    if (!(cfg.r < cfg.R)) throw SchemaError("norm", "requires 0 < r < R");

    if (auto it = j.find("tolerances"); it != j.end()) {
        check_keys(*it, {"zero_tol", "div_tol", "root_tol", "residual_tol"}, "tolerances");
        if (it->contains("zero_tol")) cfg.tol.zero_tol = as_positive((*it)["zero_tol"], "tolerances.zero_tol");
        if (it->contains("div_tol")) cfg.tol.div_tol = as_positive((*it)["div_tol"], "tolerances.div_tol");
        if (it->contains("root_tol")) cfg.tol.root_tol = as_positive((*it)["root_tol"], "tolerances.root_tol");
        if (it->contains("residual_tol"))
            cfg.tol.residual_tol = as_positive((*it)["residual_tol"], "tolerances.residual_tol");
    }
    if (auto it = j.find("radius_cap"); it != j.end()) cfg.radius_cap = as_positive(*it, "radius_cap");
    if (auto it = j.find("samples"); it != j.end()) cfg.samples = as_int(*it, "samples");
    if (cfg.samples < 1) throw SchemaError("samples", "must be at least 1");

    if (auto it = j.find("output"); it != j.end()) {
        check_keys(*it, {"report", "coefficients_csv", "norms_csv", "archive"}, "output");
        if (it->contains("report")) cfg.report_path = as_string((*it)["report"], "output.report");
        if (it->contains("coefficients_csv"))
            cfg.coefficients_csv = as_string((*it)["coefficients_csv"], "output.coefficients_csv");
        if (it->contains("norms_csv")) cfg.norms_csv = as_string((*it)["norms_csv"], "output.norms_csv");
        if (it->contains("archive")) cfg.archive_path = as_string((*it)["archive"], "output.archive");
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("config", "cannot read config file " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw SchemaError("(root)", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

OdeExpr config_equation(const RunConfig& cfg) { return parse_ode(cfg.ode, cfg.params); }

PrefixSource config_prefix(const RunConfig& cfg)
{
    return [cfg](int trunc_L) {
        int k_min = 0;
        if (!cfg.prefix.empty()) {
            k_min = cfg.prefix.front().k;
            for (const auto& e : cfg.prefix) k_min = std::min(k_min, e.k);
        }
        ExoticSeries s(cfg.gamma, k_min, std::max(cfg.prefix_k_max, k_min));
        for (const auto& e : cfg.prefix) s.set(e.k, entry_value(e, cfg.params, trunc_L));
        return s;
    };
}

CertifyConfig certify_config(const RunConfig& cfg)
{
    CertifyConfig c;
    c.K = cfg.K;
    c.L_base = cfg.L_base;
    c.norm = NormParams(cfg.r, cfg.R);
    c.tol = cfg.tol;
    c.radius_cap = cfg.radius_cap;
    c.samples = cfg.samples;
    return c;
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::uint64_t fingerprint(const RunConfig& cfg)
{
    json params = json::object();
    for (const auto& [k, v] : cfg.params) params[k] = complex_to_json(v);
    const json j{{"ode", cfg.ode},
                 {"params", params},
                 {"gamma", static_cast<double>(cfg.gamma)},
                 {"prefix", prefix_json(cfg)},
                 {"prefix_k_max", exact_or(cfg.prefix_k_max)},
                 {"L_base", cfg.L_base},
                 {"norm", {static_cast<double>(cfg.r), static_cast<double>(cfg.R)}},
                 {"tol",
                  {static_cast<double>(cfg.tol.zero_tol), static_cast<double>(cfg.tol.div_tol),
                   static_cast<double>(cfg.tol.root_tol), static_cast<double>(cfg.tol.residual_tol)}}};
    return fnv1a64(j.dump());
}

json to_json(const LaurentPoly& f)
{
    json cs = json::array();
    for (const auto& c : f.coeffs()) cs.push_back(complex_to_json(c));
    return {{"lead", f.lead()}, {"precision", exact_or(f.precision())}, {"coeffs", cs}};
}

LaurentPoly laurent_from_json(const json& j, const std::string& path)
{
    if (!j.is_object()) throw SchemaError(path, "must be an object");
    const int lead = as_int(require(j, "lead", path), join(path, "lead"));
    const json& p = require(j, "precision", path);
    const int precision = p.is_null() ? kExact : as_int(p, join(path, "precision"));
    const json& cs = require(j, "coeffs", path);
    if (!cs.is_array()) throw SchemaError(join(path, "coeffs"), "must be an array");
    std::vector<Complex> v;
    for (std::size_t i = 0; i < cs.size(); ++i) v.push_back(complex_from_json(cs[i], index_path(join(path, "coeffs"), i)));
    return LaurentPoly(lead, std::move(v), precision);
}

json to_json(const ExoticSeries& s)
{
    json terms = json::array();
    for (const auto& [k, p] : s.terms()) {
        json t = to_json(p);
        t["k"] = k;
        terms.push_back(t);
    }
    return {{"gamma", static_cast<double>(s.gamma())}, {"k_min", s.k_min()}, {"k_max", exact_or(s.k_max())}, {"terms", terms}};
}

json to_json(const ReducedEquation& eq)
{
    json a = json::array();
    for (const auto& aj : eq.a) a.push_back(to_json(aj));
    json M = json::array();
    for (const auto& t : eq.M)
        M.push_back({{"x_power", t.x_power},
                     {"u_powers", t.y_powers},
                     {"pole_order", t.coeff.is_zero() ? 0 : std::max(0, -t.coeff.lead())},
                     {"coeff", to_json(t.coeff)}});
    return {{"gamma", static_cast<double>(eq.gamma)}, {"m", eq.m}, {"N", eq.N}, {"mu", eq.mu}, {"a", a}, {"M", M}};
}

json to_json(const ConditionResult& c)
{
    json ord = json::array();
    for (const auto& o : c.ord_a) ord.push_back(optional_int(o));
    json lead = json::array();
    for (const auto& a : c.a) lead.push_back(complex_to_json(a.is_zero() ? Complex{} : a.leading_coefficient()));
    const char* status = c.status == ConditionStatus::ok ? "ok" : c.status == ConditionStatus::failed ? "failed" : "inconclusive";
    return {{"condition_ok", c.ok()}, {"status", status}, {"m", c.m}, {"ord_a", ord}, {"leading_coefficients", lead},
            {"detail", c.detail}};
}

json to_json(const ConvergenceReport& r)
{
    json ord = json::array();
    for (const auto& o : r.ord_a) ord.push_back(optional_int(o));
    json lead = json::array();
    for (const auto& c : r.leading_a) lead.push_back(complex_to_json(c));
    json zeta = json::array();
    for (const auto& z : r.zeta) zeta.push_back(complex_to_json(z));
    json dist = json::array();
    for (const auto& d : r.root_distances) dist.push_back({{"k", d.k}, {"min_distance", static_cast<double>(d.min_distance)}});
    json tail = json::array();
    for (const auto& [k, v] : r.norm_tail) tail.push_back({k, static_cast<double>(v)});
    json subs = json::array();
    for (Real s : r.sub_ratios) subs.push_back(static_cast<double>(s));
    json samples = json::array();
    for (const auto& s : r.samples)
        samples.push_back({{"modulus", static_cast<double>(s.x.modulus)},
                           {"arg", static_cast<double>(s.x.arg)},
                           {"t", complex_to_json(s.t)},
                           {"residual", static_cast<double>(s.residual)},
                           {"residual_scale", static_cast<double>(s.residual_scale)},
                           {"cauchy_ratio", static_cast<double>(s.cauchy_ratio)},
                           {"ok", s.ok}});
    json poles = json::array();
    for (const auto& p : r.pole_profile) poles.push_back({{"k", p.k}, {"nu", p.nu}, {"bound", p.bound}});
    const char* status = r.condition == ConditionStatus::ok       ? "ok"
                         : r.condition == ConditionStatus::failed ? "failed"
                                                                  : "inconclusive";
    return {{"schema", "exoseries.report"},
            {"schema_version", kReportSchemaVersion},
            {"verdict", to_string(r.verdict)},
            {"condition_ok", r.condition == ConditionStatus::ok},
            {"condition", {{"status", status}, {"detail", r.condition_detail}}},
            {"m", r.m},
            {"ord_a", ord},
            {"leading_coefficients", lead},
            {"gamma", static_cast<double>(r.gamma)},
            {"reduction",
             {{"N", r.N},
              {"N_sup", r.N_sup},
              {"relaxed_N", r.relaxed_N},
              {"mu", r.mu},
              {"indicial_roots", zeta},
              {"root_distances", dist},
              {"roots_checked_through", r.roots_checked_through},
              {"asymptotic_ok", r.asymptotic_ok}}},
            {"N", r.N},
            {"mu", r.mu},
            {"truncation",
             {{"K", r.K},
              {"L_base", r.L_base},
              {"input_trunc", r.input_trunc},
              {"min_precision", exact_or(r.min_precision)},
              {"precision_ok", r.precision_ok}}},
            {"norm", {{"r", static_cast<double>(r.norm_r)}, {"R", static_cast<double>(r.norm_R)}}},
            {"sector",
             {{"arg_lo", static_cast<double>(r.arg_lo)},
              {"arg_hi", static_cast<double>(r.arg_hi)},
              {"radius", static_cast<double>(r.radius)}}},
            {"norm_tail", tail},
            {"ratio_estimate", static_cast<double>(r.ratio_estimate)},
            {"ratio_upper", static_cast<double>(r.ratio_upper)},
            {"sub_ratios", subs},
            {"decay_ok", r.decay_ok},
            {"valuation_growth",
             {{"K1", r.growth.K1}, {"v1", exact_or(r.growth.v1)}, {"K2", r.growth.K2}, {"v2", exact_or(r.growth.v2)},
              {"ok", r.growth.ok}}},
            {"residual_stats", samples},
            {"samples_ok", r.samples_ok},
            {"pole_profile", poles},
            {"max_forward_residual", static_cast<double>(r.max_forward_residual)},
            {"notes", r.notes}};
}

void write_report(const json& body, const std::filesystem::path& path)
{
    const std::string text = body.dump(2) + "\n";
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("io", "cannot write report " + path.string());
        out << text;
    }
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ts;
    ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    const json meta{{"report", path.filename().string()}, {"timestamp", ts.str()}, {"body_fnv1a64", hex64(fnv1a64(text))}};
    std::ofstream out(path.string() + ".meta.json", std::ios::binary);
    if (!out) throw Error("io", "cannot write report sidecar for " + path.string());
    out << meta.dump(2) << "\n";
}

void write_coefficients_csv(std::ostream& os, const RecursionState& state)
{
    os << "k,exponent,re,im\n";
    os << std::setprecision(17);
    for (int k = 1; k <= state.solved_through(); ++k) {
        const LaurentPoly& c = state.c(k);
        for (int e = c.lead(); e <= c.top(); ++e) os << k << ',' << e << ',' << c[e].real() << ',' << c[e].imag() << '\n';
    }
}

void write_norms_csv(std::ostream& os, const ConvergenceReport& r)
{
    os << "k,norm\n";
    os << std::setprecision(17);
    for (const auto& [k, v] : r.norm_tail) os << k << ',' << v << '\n';
}

json to_json(const Archive& a)
{
    json cs = json::array();
    for (const auto& c : a.c) cs.push_back(to_json(c));
    json fw = json::array();
    for (Real f : a.forward) fw.push_back(std::isfinite(f) ? real_to_json(f) : json(nullptr));
    json j{{"schema", "exoseries.archive"}, {"schema_version", kArchiveSchemaVersion}, {"fingerprint", hex64(a.fingerprint)},
           {"input_trunc", a.input_trunc}, {"N", a.N}, {"K", a.c.size()}, {"c", cs}, {"forward", fw}};
    if (!a.err.empty()) {
        json es = json::array();
        for (const auto& e : a.err) es.push_back(to_json(e));
        j["err"] = es;
    }
    return j;
}

Archive archive_from_json(const json& j)
{
    if (!j.is_object() || j.value("schema", "") != "exoseries.archive") throw SchemaError("archive", "not a coefficient archive");
    if (as_int(require(j, "schema_version", "archive"), "archive.schema_version") != kArchiveSchemaVersion)
        throw SchemaError("archive.schema_version", "unsupported version");
    Archive a;
    a.fingerprint = std::stoull(as_string(require(j, "fingerprint", "archive"), "archive.fingerprint"), nullptr, 16);
    a.input_trunc = as_int(require(j, "input_trunc", "archive"), "archive.input_trunc");
    a.N = as_int(require(j, "N", "archive"), "archive.N");
    const json& cs = require(j, "c", "archive");
    for (std::size_t i = 0; i < cs.size(); ++i) a.c.push_back(laurent_from_json(cs[i], index_path("archive.c", i)));
    if (auto it = j.find("forward"); it != j.end())
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& f = (*it)[i];
            a.forward.push_back(f.is_null() ? std::numeric_limits<Real>::quiet_NaN() : as_real(f, index_path("archive.forward", i)));
        }
    if (auto it = j.find("err"); it != j.end()) {
        for (std::size_t i = 0; i < it->size(); ++i) a.err.push_back(laurent_from_json((*it)[i], index_path("archive.err", i)));
        if (a.err.size() != a.c.size()) throw SchemaError("archive.err", "must have one entry per coefficient");
    }
    return a;
}

void save_archive(const Archive& a, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write archive " + path.string());
    out << to_json(a).dump() << "\n";
}

Archive load_archive(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot read archive " + path.string());
    try {
        return archive_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw SchemaError("archive", std::string("malformed JSON: ") + e.what());
    }
}

} // namespace exoseries
