#include "carpet/experiment.hpp"

#include "carpet/error.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace carpet {

std::string csv_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t h = 0; h < fields.size(); ++h) {
        if (h) out += ',';
        out += csv_field(fields[h]);
    }
    out += "\r\n";
    return out;
}

namespace {

std::string str(std::size_t v) { return std::to_string(v); }
std::string str(int v) { return std::to_string(v); }
std::string flag(bool b) { return b ? "true" : "false"; }

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep))
        if (!cur.empty()) parts.push_back(cur);
    return parts;
}

long parse_long(const std::string& s) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) throw CarpetError(ErrorCode::Config, "not an integer: '" + s + "'");
    return v;
}

void write_file(const std::filesystem::path& path, const std::string& content, RunOutcome& out) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CarpetError(ErrorCode::Config, "cannot write '" + path.string() + "'");
    f << content;
    f.flush();
    out.files.push_back(path.string());
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) {
        char* end = nullptr;
        const double v = std::strtod(part.c_str(), &end);
        if (end != part.c_str() + part.size()) throw CarpetError(ErrorCode::Config, "not a number: '" + part + "'");
        out.push_back(v);
    }
    if (out.empty()) throw CarpetError(ErrorCode::Config, "empty list '" + text + "'");
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const auto& part : split(text, ',')) {
        if (const auto colon = part.find(':'); colon != std::string::npos) {
            const long lo = parse_long(part.substr(0, colon));
            const long hi = parse_long(part.substr(colon + 1));
            if (hi < lo) throw CarpetError(ErrorCode::Config, "empty range '" + part + "'");
            for (long v = lo; v <= hi; ++v) out.push_back(static_cast<int>(v));
        } else {
            out.push_back(static_cast<int>(parse_long(part)));
        }
    }
    if (out.empty()) throw CarpetError(ErrorCode::Config, "empty list '" + text + "'");
    return out;
}

std::string dimension_csv(const CarpetSpec& spec, std::span<const double> r_values) {
    std::string out = csv_row({"r", "s_r", "P_r", "Q_r", "eta_lo", "eta_hi", "H1", "xi", "M", "H2", "H3", "H4", "H5"});
    for (double r : r_values) {
        const SpectralConstants c = constants(spec, r);
        out += csv_row({csv_number(r), csv_number(c.s), csv_number(c.P), csv_number(c.Q), csv_number(c.eta_lo),
                        csv_number(c.eta_hi), str(c.H1), csv_number(c.xi), str(c.M), csv_number(c.H2),
                        csv_number(c.H3), csv_number(c.H4), csv_number(c.H5)});
    }
    return out;
}

std::string antichain_csv(const CertificateReport& report, bool with_r) {
    std::vector<std::string> header{"j", "psi", "k1", "k2", "sumE", "H1_bound_ok", "lemma31_max_ratio",
                                    "lemma41_max_ratio", "phi", "s12_ok"};
    if (with_r) header.insert(header.begin(), "r");
    std::string out = csv_row(header);
    for (const auto& rec : report.records) {
        if (!rec.complete) continue;
        std::vector<std::string> row{str(rec.j), str(rec.psi), str(rec.k1), str(rec.k2), csv_number(rec.sum_energy),
                                     flag(rec.h1_bound_ok), csv_number(rec.s1_max_ratio),
                                     csv_number(rec.s2_max_ratio), str(rec.phi), flag(rec.s12_ok)};
        if (with_r) row.insert(row.begin(), csv_number(report.constants.r));
        out += csv_row(row);
    }
    return out;
}

std::string certificates_csv(const CertificateReport& report, bool with_r) {
    std::vector<std::string> header{"j", "check", "value", "bound", "pass", "witness"};
    if (with_r) header.insert(header.begin(), "r");
    std::string out = csv_row(header);
    for (const auto& rec : report.records) {
        for (const auto& ch : rec.checks) {
            std::vector<std::string> row{str(rec.j), ch.name, csv_number(ch.value), csv_number(ch.bound),
                                         flag(ch.pass), ch.witness};
            if (with_r) row.insert(row.begin(), csv_number(report.constants.r));
            out += csv_row(row);
        }
        if (!rec.complete) {
            std::vector<std::string> row{str(rec.j), "cap", "0", "0", "false", report.cap_message};
            if (with_r) row.insert(row.begin(), csv_number(report.constants.r));
            out += csv_row(row);
        }
    }
    return out;
}

std::vector<QuantizeRow> quantize(const SamplePool& pool, double r, std::span<const std::size_t> ks,
                                  std::size_t restarts, std::uint64_t seed, const LloydOptions& opts) {
    std::vector<QuantizeRow> rows;
    for (std::size_t k : ks) {
        const BestOfLloyd best = best_of_lloyd(pool, k, r, restarts, seed, opts);
        rows.push_back({r, k, std::pow(best.best.distortion, 1.0 / r), best.best.iters, best.restarts_used});
    }
    return rows;
}

std::string quantize_csv(std::span<const QuantizeRow> rows, bool with_r) {
    std::vector<std::string> header{"k", "e_k_r", "iters", "restarts_used"};
    if (with_r) header.insert(header.begin(), "r");
    std::string out = csv_row(header);
    for (const auto& q : rows) {
        std::vector<std::string> row{str(q.k), csv_number(q.e_k_r), str(q.iters), str(q.restarts_used)};
        if (with_r) row.insert(row.begin(), csv_number(q.r));
        out += csv_row(row);
    }
    return out;
}

std::vector<ProxyRow> proxy_rows(const CarpetSpec& spec, const SpectralConstants& c, const SamplePool& pool,
                                 std::span<const int> j_values, std::size_t cap) {
    std::vector<ProxyRow> rows;
    for (int j : j_values) {
        const Antichain ups = build_upsilon(spec, c, j, cap);
        const DistortionStats d = distortion_stats(pool, antichain_codebook(spec, ups), c.r);
        rows.push_back({j, ups.words.size(), theoretical_proxy(spec, c.r, ups), d.mean, d.std_error});
    }
    return rows;
}

std::string proxy_csv(std::span<const ProxyRow> rows) {
    std::string out = csv_row({"j", "psi", "proxy", "antichain_distortion"});
    for (const auto& p : rows)
        out += csv_row({str(p.j), str(p.psi), csv_number(p.proxy), csv_number(p.antichain_distortion)});
    return out;
}

std::string summary_csv(std::span<const SummaryRow> rows) {
    std::string out = csv_row({"r", "s_r", "slope", "slope_err", "band_ratio", "all_certificates_pass"});
    for (const auto& s : rows)
        out += csv_row({csv_number(s.r), csv_number(s.s_r), csv_number(s.slope), csv_number(s.slope_err),
                        csv_number(s.band_ratio), flag(s.all_certificates_pass)});
    return out;
}

void validate_run_config(const RunConfig& config) {
    auto fail = [](const std::string& what) { throw CarpetError(ErrorCode::Config, what); };
    if (config.r_values.empty()) fail("r_values is empty");
    for (double r : config.r_values)
        if (!(r > 0.0) || !std::isfinite(r)) fail("every r must be positive and finite");
    for (int j : config.j_values)
        if (j < 0) fail("j values must be >= 0");
    if (config.samples < 1) fail("samples must be >= 1");
    if (config.k_grid.size() < 2) fail("k_grid needs at least two sizes for the slope fit");
    for (std::size_t k : config.k_grid)
        if (k < 1 || k > config.samples) fail("every k must lie in [1, samples]");
    if (config.restarts < 1) fail("restarts must be >= 1");
    if (config.cap < 1) fail("cap must be >= 1");
    if (config.output_dir.empty()) fail("output_dir is empty");
}

RunOutcome run(const RunConfig& config) {
    RunOutcome out;
    CarpetSpec spec;
    try {
        spec = validate_spec(load_carpet_file(config.carpet_path));
        validate_run_config(config);
    } catch (const CarpetError& e) {
        out.exit_code = kExitConfigError;
        out.message = std::string("validate: ") + e.what();
        return out;
    }

    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    std::string stage = "dimension";
    try {
        write_file(dir / "dimension.csv", dimension_csv(spec, config.r_values), out);

        stage = "certify";
        std::string antichains = csv_row({"r", "j", "psi", "k1", "k2", "sumE", "H1_bound_ok", "lemma31_max_ratio",
                                          "lemma41_max_ratio", "phi", "s12_ok"});
        std::string certificates = csv_row({"r", "j", "check", "value", "bound", "pass", "witness"});
        std::vector<SummaryRow> summary;
        bool all_pass = true;
        bool capped = false;
        for (double r : config.r_values) {
            const SpectralConstants c = constants(spec, r);
            const CertificateReport report = certify(spec, c, config.j_values, config.cap);
            auto strip_header = [](const std::string& csv) { return csv.substr(csv.find("\r\n") + 2); };
            antichains += strip_header(antichain_csv(report, true));
            certificates += strip_header(certificates_csv(report, true));
            all_pass = all_pass && report.valid();
            capped = capped || report.capped;
            summary.push_back({r, c.s, 0.0, 0.0, 0.0, report.valid()});
        }
        write_file(dir / "antichain.csv", antichains, out);
        write_file(dir / "certificates.csv", certificates, out);

        stage = "quantize";
        const SamplePool pool = sample(spec, config.samples, config.seed);
        std::vector<QuantizeRow> rows;
        for (auto& s : summary) {
            auto q = quantize(pool, s.r, config.k_grid, config.restarts, config.seed);
            std::vector<double> errors;
            for (const auto& row : q) errors.push_back(row.e_k_r);
            const ScalingFit fit = scaling_fit(config.k_grid, errors, s.r, s.s_r);
            s.slope = fit.slope;
            s.slope_err = fit.slope_rel_err;
            s.band_ratio = fit.band_ratio;
            rows.insert(rows.end(), q.begin(), q.end());
        }
        write_file(dir / "quantize.csv", quantize_csv(rows, true), out);

        stage = "summary";
        write_file(dir / "summary.csv", summary_csv(summary), out);

        if (capped) {
            out.exit_code = kExitResourceCap;
            out.message = "certificates incomplete: resource cap reached";
        } else if (!all_pass) {
            out.exit_code = kExitCertificateFailure;
            out.message = "certificate failure (see certificates.csv)";
        }
    } catch (const CarpetError& e) {
        out.exit_code = e.code() == ErrorCode::CapExceeded ? kExitResourceCap
                        : e.code() == ErrorCode::Config ? kExitConfigError
                                                        : kExitCertificateFailure;
        out.message = stage + ": " + e.what();
    }
    return out;
}

}  // namespace carpet
