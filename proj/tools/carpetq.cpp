// carpetq: command-line front end for the carpet quantization library.
#include "carpet/antichain.hpp"
#include "carpet/carpet_spec.hpp"
#include "carpet/error.hpp"
#include "carpet/experiment.hpp"
#include "carpet/quantizer.hpp"
#include "carpet/spectral.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

using namespace carpet;

namespace {

struct Options {
    std::string config;
    std::string r_list = "2";
    std::string j_list = "0:8";
    std::string k_list = "1,2,4,8,16,32,64";
    std::size_t cap = kDefaultCap;
    std::size_t samples = 200000;
    std::uint64_t seed = 20240501;
    std::size_t restarts = 5;
    std::string out = "carpet_run";
};

CarpetSpec load(const Options& o) { return validate_spec(load_carpet_file(o.config)); }

double single_r(const Options& o) {
    const auto rs = parse_real_list(o.r_list);
    if (rs.size() != 1) throw CarpetError(ErrorCode::Config, "expected a single r value");
    if (!(rs[0] > 0.0)) throw CarpetError(ErrorCode::Config, "r must be positive");
    return rs[0];
}

std::vector<std::size_t> k_values(const Options& o) {
    std::vector<std::size_t> ks;
    for (int k : parse_int_list(o.k_list)) {
        if (k < 1 || static_cast<std::size_t>(k) > o.samples)
            throw CarpetError(ErrorCode::Config, "every k must lie in [1, samples]");
        ks.push_back(static_cast<std::size_t>(k));
    }
    return ks;
}

int cmd_validate(const Options& o) {
    std::cout << describe(load(o)) << '\n';
    return kExitPass;
}

int cmd_dimension(const Options& o) {
    const CarpetSpec spec = load(o);
    const auto rs = parse_real_list(o.r_list);
    std::cout << dimension_csv(spec, rs);
    return kExitPass;
}

int cmd_antichain(const Options& o, bool full_checks) {
    const CarpetSpec spec = load(o);
    const SpectralConstants c = constants(spec, single_r(o));
    const auto js = parse_int_list(o.j_list);
    const CertificateReport report = certify(spec, c, js, o.cap);
    std::cout << (full_checks ? certificates_csv(report) : antichain_csv(report));
    if (report.capped) {
        std::cerr << "carpetq: " << report.cap_message << '\n';
        return kExitResourceCap;
    }
    return report.valid() ? kExitPass : kExitCertificateFailure;
}

int cmd_quantize(const Options& o) {
    const CarpetSpec spec = load(o);
    const double r = single_r(o);
    const auto ks = k_values(o);
    const SamplePool pool = sample(spec, o.samples, o.seed);
    const auto rows = quantize(pool, r, ks, o.restarts, o.seed);
    std::cout << quantize_csv(rows);
    return kExitPass;
}

int cmd_proxy(const Options& o) {
    const CarpetSpec spec = load(o);
    const SpectralConstants c = constants(spec, single_r(o));
    const auto js = parse_int_list(o.j_list);
    const SamplePool pool = sample(spec, o.samples, o.seed);
    const auto rows = proxy_rows(spec, c, pool, js, o.cap);
    std::cout << proxy_csv(rows);
    return kExitPass;
}

int cmd_run(const Options& o) {
    RunConfig rc;
    rc.carpet_path = o.config;
    rc.r_values = parse_real_list(o.r_list);
    rc.j_values = parse_int_list(o.j_list);
    rc.k_grid.clear();
    for (int k : parse_int_list(o.k_list)) {
        if (k < 1) throw CarpetError(ErrorCode::Config, "every k must be >= 1");
        rc.k_grid.push_back(static_cast<std::size_t>(k));
    }
    rc.samples = o.samples;
    rc.seed = o.seed;
    rc.cap = o.cap;
    rc.restarts = o.restarts;
    rc.output_dir = o.out;
    const RunOutcome outcome = run(rc);
    for (const auto& f : outcome.files) std::cout << f << '\n';
    if (!outcome.message.empty()) std::cerr << "carpetq: " << outcome.message << '\n';
    return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantization dimension and certificates for Bedford-McMullen carpets"};
    app.require_subcommand(1);
    Options o;

    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "carpet JSON file")->required()->check(CLI::ExistingFile);
    };

    auto* validate = app.add_subcommand("validate", "check a carpet file and print its index sets");
    add_config(validate);

    auto* dimension = app.add_subcommand("dimension", "solve for s_r and the derived constants");
    add_config(dimension);
    dimension->add_option("--r", o.r_list, "comma-separated r values");

    auto* antichain = app.add_subcommand("antichain", "per-j antichain statistics");
    auto* certify_cmd = app.add_subcommand("certify", "every certificate check, one row each");
    for (auto* sub : {antichain, certify_cmd}) {
        add_config(sub);
        sub->add_option("--r", o.r_list, "r value");
        sub->add_option("--j", o.j_list, "j values, e.g. 0:8 or 2,3,4");
        sub->add_option("--cap", o.cap, "maximum antichain size");
    }

    auto* quantize_cmd = app.add_subcommand("quantize", "empirical quantization errors by Lloyd");
    add_config(quantize_cmd);
    quantize_cmd->add_option("--r", o.r_list, "r value");
    quantize_cmd->add_option("--k", o.k_list, "codebook sizes");
    quantize_cmd->add_option("--samples", o.samples, "sample pool size");
    quantize_cmd->add_option("--seed", o.seed, "RNG seed");
    quantize_cmd->add_option("--restarts", o.restarts, "Lloyd restarts per k");

    auto* proxy = app.add_subcommand("proxy", "antichain codebook distortion vs the energy proxy");
    add_config(proxy);
    proxy->add_option("--r", o.r_list, "r value");
    proxy->add_option("--j", o.j_list, "j values");
    proxy->add_option("--samples", o.samples, "sample pool size");
    proxy->add_option("--seed", o.seed, "RNG seed");
    proxy->add_option("--cap", o.cap, "maximum antichain size");

    auto* run_cmd = app.add_subcommand("run", "full pipeline, writes five CSV files");
    add_config(run_cmd);
    run_cmd->add_option("--r", o.r_list, "r values");
    run_cmd->add_option("--j", o.j_list, "j values");
    run_cmd->add_option("--k", o.k_list, "codebook sizes");
    run_cmd->add_option("--samples", o.samples, "sample pool size");
    run_cmd->add_option("--seed", o.seed, "RNG seed");
    run_cmd->add_option("--cap", o.cap, "maximum antichain size");
    run_cmd->add_option("--restarts", o.restarts, "Lloyd restarts per k");
    run_cmd->add_option("--out", o.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfigError;
    }

    try {
        if (*validate) return cmd_validate(o);
        if (*dimension) return cmd_dimension(o);
        if (*antichain) return cmd_antichain(o, false);
        if (*certify_cmd) return cmd_antichain(o, true);
        if (*quantize_cmd) return cmd_quantize(o);
        if (*proxy) return cmd_proxy(o);
        if (*run_cmd) return cmd_run(o);
    } catch (const CapExceeded& e) {
        std::cerr << "carpetq: " << e.what() << '\n';
        return kExitResourceCap;
    } catch (const CarpetError& e) {
        std::cerr << "carpetq: " << e.what() << '\n';
        return e.code() == ErrorCode::NoBracket || e.code() == ErrorCode::Overflow ? kExitCertificateFailure
                                                                                   : kExitConfigError;
    }
    return kExitConfigError;
}
