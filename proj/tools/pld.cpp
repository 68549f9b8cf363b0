#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pld/bench.hpp"
#include "pld/blind.hpp"
#include "pld/gradcheck.hpp"
#include "pld/io.hpp"
#include "pld/metrics.hpp"
#include "pld/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pld;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

// One CLI flag per BlindConfig key; values funnel through the same
// key=value application as config files, so CLI > file > default.
const char* kConfigKeys[] = {
    "max_iterations", "step_size",     "kernel_size",   "l1_enabled",  "denoiser_enabled",
    "backtracking",   "mu0",           "gamma0",        "photon_beta", "unroll_steps",
    "epsilon",        "boundary",      "solver",        "gd_step_scale", "gd_prior",
    "tv_weight",      "tv_iterations", "denoise_mode",  "init_c",      "init_b",
    "init_sigma_min", "init_sigma_max", "init_directions"};

struct ConfigFlags {
    std::map<std::string, std::string> values;

    void attach(CLI::App* cmd) {
        for (const char* key : kConfigKeys) {
            std::string flag = "--";
            for (const char* p = key; *p; ++p) flag += *p == '_' ? '-' : *p;
            cmd->add_option_function<std::string>(
                flag, [this, key](const std::string& v) { values[key] = v; },
                "override config key " + std::string(key));
        }
    }
};

double psnrCapped(double v) { return std::isfinite(v) ? v : 99.0; }

void writeLossCsv(const std::string& path, const RunReport& report) {
    std::ofstream csv(path);
    if (!csv) throw IoError("cannot open " + path + " for writing");
    const bool withPsnr = !report.perIteration.empty() && report.perIteration.front().psnr;
    csv << "iter,loss,mu,gamma" << (withPsnr ? ",psnr\n" : "\n");
    char buf[160];
    for (const auto& rec : report.perIteration) {
        if (withPsnr)
            std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.4f\n", rec.k, rec.loss,
                          rec.mu, rec.gamma, psnrCapped(*rec.psnr));
        else
            std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g\n", rec.k, rec.loss, rec.mu,
                          rec.gamma);
        csv << buf;
    }
}

int cmdSimulate(const std::string& imageSpec, const std::string& kernelSpec, double alpha,
                uint64_t seed, const std::string& outDir, int kernelSize) {
    const Field2D x = load_image_spec(imageSpec);
    const BlurKernel h = parse_kernel_spec(kernelSpec, kernelSize);
    const Field2D y = simulate(x, h, PhotonLevel(alpha), seed);

    fs::create_directories(outDir);
    write_image_counts((fs::path(outDir) / "y.png").string(), y);
    write_image_latent((fs::path(outDir) / "x_true.png").string(), x);
    save_kernel_text((fs::path(outDir) / "kernel_true.txt").string(), h);
    std::ofstream meta(fs::path(outDir) / "meta.txt");
    meta << "image=" << imageSpec << "\nkernel=" << kernelSpec << "\nalpha=" << alpha
         << "\nseed=" << seed << "\nkernel_size=" << kernelSize << "\n";
    std::printf("wrote %s/y.png (%dx%d), mean count %.3f\n", outDir.c_str(), y.width(),
                y.height(), mean(y));
    return kExitOk;
}

int cmdDeblur(const std::string& inputPath, std::optional<double> alpha,
              const std::string& configPath, const ConfigFlags& flags,
              const std::string& truthPath, const std::string& outDir) {
    BlindConfig cfg;
    if (!configPath.empty()) apply_blind_config(cfg, parse_key_value_file(configPath));
    apply_blind_config(cfg, flags.values);

    const Field2D y = read_image_counts(inputPath);
    std::optional<Field2D> truth;
    if (!truthPath.empty()) truth = read_image_latent(truthPath);

    const RunReport report = run_blind(y, alpha, cfg, truth ? &*truth : nullptr);

    fs::create_directories(outDir);
    write_image_latent((fs::path(outDir) / "xhat.png").string(), report.finalImage);
    save_kernel_text((fs::path(outDir) / "kernel_est.txt").string(), report.finalKernel);
    writeLossCsv((fs::path(outDir) / "loss.csv").string(), report);

    json j;
    j["alpha_used"] = report.alphaUsed;
    j["alpha_estimated"] = !alpha.has_value();
    j["iterations"] = report.perIteration.size() - 1;
    j["loss_initial"] = report.perIteration.front().loss;
    j["loss_final"] = report.perIteration.back().loss;
    j["aborted"] = report.aborted;
    if (!report.message.empty()) j["message"] = report.message;
    if (truth) j["psnr_final"] = psnrCapped(psnr(report.finalImage, *truth));
    std::ofstream(fs::path(outDir) / "report.json") << j.dump(2) << "\n";

    std::printf("alpha=%.4f loss %.6g -> %.6g (%zu iterations)%s\n", report.alphaUsed,
                report.perIteration.front().loss, report.perIteration.back().loss,
                report.perIteration.size() - 1, report.aborted ? " [aborted]" : "");
    return report.aborted ? kExitNumerical : kExitOk;
}

int cmdGradCheck(const GradCheckOptions& opt, bool injectBug) {
    GradCheckReport rep;
    if (injectBug) {
        rep = run_gradient_check(
            [](const SolverConfig& cfg) { return make_broken_solver(cfg); }, opt);
    } else {
        rep = run_gradient_check(opt);
    }
    std::printf("instances=%d image<=%d kernel<=%d unroll<=%d solver=%s\n", opt.instances,
                opt.maxImage, opt.maxKernel, opt.maxUnroll,
                opt.kind == SolverKind::gradient_descent ? "gd" : "rl");
    std::printf("max relative error = %.6e (tolerance %.1e) -> %s\n", rep.maxRelError,
                opt.tolerance, rep.pass ? "PASS" : "FAIL");
    return rep.pass ? kExitOk : kExitNumerical;
}

int cmdEvaluate(const std::string& estimatePath, const std::string& truthPath,
                const std::string& kernelEstPath, const std::string& kernelTruePath, bool align,
                const std::string& format) {
    const Field2D xhat = read_image_latent(estimatePath);
    const Field2D xtrue = read_image_latent(truthPath);
    const double p = psnrCapped(psnr(xhat, xtrue));
    const double s = ssim(xhat, xtrue);

    std::optional<MaeResult> mae;
    if (!kernelEstPath.empty() || !kernelTruePath.empty()) {
        if (kernelEstPath.empty() || kernelTruePath.empty())
            throw std::invalid_argument("evaluate: need both kernel files or neither");
        BlurKernel hest = load_kernel_text(kernelEstPath);
        BlurKernel htrue = load_kernel_text(kernelTruePath);
        const int m = std::max(hest.size(), htrue.size());
        hest = embed_kernel_centered(hest, m);
        htrue = embed_kernel_centered(htrue, m);
        mae = kernel_mae(hest, htrue, align);
    }

    if (format == "json") {
        json j;
        j["psnr"] = p;
        j["ssim"] = s;
        if (mae) {
            j["kernel_mae"] = mae->mae;
            j["shift"] = {mae->shiftRow, mae->shiftCol};
        }
        std::printf("%s\n", j.dump().c_str());
    } else {
        if (mae)
            std::printf("psnr,ssim,kernel_mae,shift_row,shift_col\n%.4f,%.6f,%.8f,%d,%d\n", p, s,
                        mae->mae, mae->shiftRow, mae->shiftCol);
        else
            std::printf("psnr,ssim\n%.4f,%.6f\n", p, s);
    }
    return kExitOk;
}

int cmdBench(const std::string& configPath, const ConfigFlags& flags, const std::string& outDir,
             std::optional<uint64_t> seed) {
    ExperimentConfig cfg = ExperimentConfig::from_file(configPath);
    apply_blind_config(cfg.blind, flags.values);
    if (!outDir.empty()) cfg.outputDir = outDir;
    if (seed) cfg.seed = *seed;

    fs::create_directories(cfg.outputDir);
    const auto rows = run_bench(cfg);
    if (cfg.emitCsv) write_bench_csv((fs::path(cfg.outputDir) / "table.csv").string(), rows);
    std::printf("bench: %zu cells -> %s/table.csv\n", rows.size(), cfg.outputDir.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised blind deconvolution for photon-limited images"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "blur an image and draw Poisson counts");
    std::string simImage, simKernel, simOut = "sim_out";
    double simAlpha = 20.0;
    uint64_t simSeed = 1;
    int simKernelSize = 31;
    sim->add_option("--image", simImage, "image path or synth:<seed>[:<size>]")->required();
    sim->add_option("--kernel", simKernel, "kernel spec or file")->required();
    sim->add_option("--alpha", simAlpha, "photon level");
    sim->add_option("--seed", simSeed, "sampler seed");
    sim->add_option("--kernel-size", simKernelSize, "grid for synthesized kernels");
    sim->add_option("--out", simOut, "output directory");

    // deblur
    auto* deb = app.add_subcommand("deblur", "estimate kernel and image from counts");
    std::string debInput, debConfig, debTruth, debOut = "deblur_out";
    double debAlpha = -1.0;
    bool debStrict = false;
    ConfigFlags debFlags;
    deb->add_option("--input", debInput, "observed counts image")->required();
    deb->add_option("--alpha", debAlpha, "photon level (estimated when omitted)");
    deb->add_option("--config", debConfig, "key=value config file");
    deb->add_option("--truth", debTruth, "ground-truth latent image for monitoring");
    deb->add_option("--out", debOut, "output directory");
    deb->add_flag("--strict-alg1", debStrict, "fixed step size, no backtracking line search");
    debFlags.attach(deb);

    // gradcheck
    auto* grad = app.add_subcommand("gradcheck", "finite-difference conformance suite");
    GradCheckOptions gopt;
    std::string gradSolver = "rl";
    bool injectBug = false;
    grad->add_option("--instances", gopt.instances, "number of random instances");
    grad->add_option("--max-size", gopt.maxImage, "max image side");
    grad->add_option("--max-kernel", gopt.maxKernel, "max kernel side (odd)");
    grad->add_option("--max-unroll", gopt.maxUnroll, "max unroll depth");
    grad->add_option("--seed", gopt.seed, "suite seed");
    grad->add_option("--tolerance", gopt.tolerance, "max-norm relative error bound");
    grad->add_option("--fd-step", gopt.fdStep, "finite-difference step");
    grad->add_option("--solver", gradSolver, "rl|gd")->check(CLI::IsMember({"rl", "gd"}));
    grad->add_flag("--inject-bug", injectBug, "use the deliberately wrong VJP (must fail)");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "PSNR/SSIM/kernel-MAE report");
    std::string evalEst, evalTruth, evalKest, evalKtrue, evalFormat = "csv";
    bool noAlign = false;
    eval->add_option("--estimate", evalEst, "estimated latent image")->required();
    eval->add_option("--truth", evalTruth, "ground-truth latent image")->required();
    eval->add_option("--kernel-est", evalKest, "estimated kernel file");
    eval->add_option("--kernel-true", evalKtrue, "true kernel file");
    eval->add_flag("--no-align", noAlign, "skip shift alignment in kernel MAE");
    eval->add_option("--format", evalFormat, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    // bench
    auto* ben = app.add_subcommand("bench", "sweep images x kernels x alphas x ablations");
    std::string benConfig, benOut;
    std::string benSeedStr;
    ConfigFlags benFlags;
    ben->add_option("--config", benConfig, "experiment config file")->required();
    ben->add_option("--out", benOut, "output directory override");
    ben->add_option("--seed", benSeedStr, "seed override");
    benFlags.attach(ben);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sim->parsed())
            return cmdSimulate(simImage, simKernel, simAlpha, simSeed, simOut, simKernelSize);
        if (deb->parsed()) {
            if (debStrict) debFlags.values["backtracking"] = "0";
            std::optional<double> alpha;
            if (debAlpha > 0.0) alpha = debAlpha;
            return cmdDeblur(debInput, alpha, debConfig, debFlags, debTruth, debOut);
        }
        if (grad->parsed()) {
            gopt.kind = gradSolver == "gd" ? SolverKind::gradient_descent
                                           : SolverKind::richardson_lucy;
            return cmdGradCheck(gopt, injectBug);
        }
        if (eval->parsed())
            return cmdEvaluate(evalEst, evalTruth, evalKest, evalKtrue, !noAlign, evalFormat);
        if (ben->parsed()) {
            std::optional<uint64_t> seed;
            if (!benSeedStr.empty()) seed = std::stoull(benSeedStr);
            return cmdBench(benConfig, benFlags, benOut, seed);
        }
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const DegenerateKernelError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const DegenerateInputError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitUsage;
}
