#pragma once

#include "carpet/antichain.hpp"
#include "carpet/carpet_spec.hpp"
#include "carpet/quantizer.hpp"
#include "carpet/spectral.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace carpet {

enum ExitCode : int { kExitPass = 0, kExitCertificateFailure = 1, kExitConfigError = 2, kExitResourceCap = 3 };

/// Doubles are written with 17 significant digits, '.' decimal.
std::string csv_number(double x);
/// Quotes a field when it contains a comma, quote or line break.
std::string csv_field(const std::string& s);
/// Joins fields into one CRLF-terminated record.
std::string csv_row(const std::vector<std::string>& fields);

/// "2", "0.5,1,2"
std::vector<double> parse_real_list(const std::string& text);
/// "0:8" (inclusive range), "1,2,4" or a mix "0:3,7"
std::vector<int> parse_int_list(const std::string& text);

std::string dimension_csv(const CarpetSpec& spec, std::span<const double> r_values);

std::string antichain_csv(const CertificateReport& report, bool with_r = false);
std::string certificates_csv(const CertificateReport& report, bool with_r = false);

struct QuantizeRow {
    double r = 0.0;
    std::size_t k = 0;
    double e_k_r = 0.0;  // distortion^(1/r)
    std::size_t iters = 0;
    std::size_t restarts_used = 0;
};

std::vector<QuantizeRow> quantize(const SamplePool& pool, double r, std::span<const std::size_t> ks,
                                  std::size_t restarts, std::uint64_t seed, const LloydOptions& opts = {});
std::string quantize_csv(std::span<const QuantizeRow> rows, bool with_r = false);

struct ProxyRow {
    int j = 0;
    std::size_t psi = 0;
    double proxy = 0.0;
    double antichain_distortion = 0.0;
    double std_error = 0.0;
};

std::vector<ProxyRow> proxy_rows(const CarpetSpec& spec, const SpectralConstants& c, const SamplePool& pool,
                                 std::span<const int> j_values, std::size_t cap = kDefaultCap);
std::string proxy_csv(std::span<const ProxyRow> rows);

struct SummaryRow {
    double r = 0.0;
    double s_r = 0.0;
    double slope = 0.0;
    double slope_err = 0.0;
    double band_ratio = 0.0;
    bool all_certificates_pass = false;
};
std::string summary_csv(std::span<const SummaryRow> rows);

struct RunConfig {
    std::string carpet_path;
    std::vector<double> r_values{2.0};
    std::vector<int> j_values{0, 1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<std::size_t> k_grid{1, 2, 4, 8, 16, 32, 64};
    std::size_t samples = 200000;
    std::uint64_t seed = 20240501;
    std::size_t cap = kDefaultCap;
    std::size_t restarts = 5;
    std::string output_dir = "carpet_run";
};

/// Throws CarpetError(Config) on an invalid field.
void validate_run_config(const RunConfig& config);

struct RunOutcome {
    int exit_code = kExitPass;
    std::vector<std::string> files;
    std::string message;
};

/// Validates everything, then writes dimension.csv, antichain.csv,
/// certificates.csv, quantize.csv and summary.csv into output_dir. Each file
/// is written as soon as its stage finishes.
RunOutcome run(const RunConfig& config);

}  // namespace carpet
