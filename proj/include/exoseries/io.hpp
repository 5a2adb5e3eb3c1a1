#ifndef EXOSERIES_IO_HPP
#define EXOSERIES_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include <exoseries/certify.hpp>
#include <exoseries/common.hpp>
#include <exoseries/exotic.hpp>
#include <exoseries/expr.hpp>
#include <exoseries/laurent.hpp>
#include <exoseries/reduce.hpp>
#include <exoseries/solver.hpp>

namespace exoseries
{

using json = nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kArchiveSchemaVersion = 1;

// Invalid configuration; the message starts with the offending field path.
class SchemaError : public Error
{
  public:
    SchemaError(const std::string& path, const std::string& what) : Error("config", path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

  private:
    std::string path_;
};

// One grade of the prefix: either a rational function of t expanded at
// t = 0, or explicit Laurent coefficients.
struct PrefixEntry {
    int k = 0;
    std::string num;
    std::string den;
    bool rational = false;
    int lead = 0;
    std::vector<Complex> coeffs;
    int precision = kExact;
};

struct RunConfig {
    int schema_version = kConfigSchemaVersion;
    std::string ode;
    ParamMap params;
    Real gamma = 1;
    std::vector<PrefixEntry> prefix;
    int prefix_k_max = kExact;  // kExact: the prefix is a finite sum
    int K = 30;
    int L_base = 40;
    Real r = 0.1;
    Real R = 0.2;
    Tolerances tol;
    Real radius_cap = 1;
    int samples = 20;
    std::string report_path;
    std::string coefficients_csv;
    std::string norms_csv;
    std::string archive_path;
};

RunConfig parse_config(const json& j);
RunConfig load_config(const std::filesystem::path& path);

OdeExpr config_equation(const RunConfig& cfg);
PrefixSource config_prefix(const RunConfig& cfg);
CertifyConfig certify_config(const RunConfig& cfg);

// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Hash of everything that determines the coefficients except K.
std::uint64_t fingerprint(const RunConfig& cfg);

json complex_to_json(Complex c);
Complex complex_from_json(const json& j, const std::string& path);

json to_json(const LaurentPoly& f);
LaurentPoly laurent_from_json(const json& j, const std::string& path = "laurent");
json to_json(const ExoticSeries& s);
json to_json(const ReducedEquation& eq);
json to_json(const ConditionResult& c);
json to_json(const ConvergenceReport& r);

// Report body plus a sidecar "<path>.meta.json" holding the timestamp and
// the hash of the body.
void write_report(const json& body, const std::filesystem::path& path);

// k,exponent,re,im for every stored coefficient of c_1..c_K.
void write_coefficients_csv(std::ostream& os, const RecursionState& state);
// k,norm
void write_norms_csv(std::ostream& os, const ConvergenceReport& r);

struct Archive {
    std::uint64_t fingerprint = 0;
    int input_trunc = 0;
    int N = 0;
    std::vector<LaurentPoly> c;
    std::vector<Real> forward;
    // rounding bounds, one per coefficient (optional)
    std::vector<LaurentPoly> err;
};

json to_json(const Archive& a);
Archive archive_from_json(const json& j);
void save_archive(const Archive& a, const std::filesystem::path& path);
Archive load_archive(const std::filesystem::path& path);

} // namespace exoseries

#endif
