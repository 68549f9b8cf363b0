#include "pld/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "pld/io.hpp"
#include "pld/metrics.hpp"
#include "pld/synth.hpp"

namespace pld {

namespace {

uint64_t fnv1a(const std::string& s, uint64_t h = 1469598103934665603ull) {
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::string fmtNum(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
    return out;
}

struct Variant {
    std::string name;
    BlindConfig cfg;
};

std::vector<Variant> makeVariants(const ExperimentConfig& cfg) {
    std::vector<Variant> variants;
    variants.push_back({"full", cfg.blind});
    {
        BlindConfig c = cfg.blind;
        c.maxIterations = 0;
        variants.push_back({"init_only", c});
    }
    if (cfg.ablateDenoiser) {
        BlindConfig c = cfg.blind;
        c.denoiserEnabled = false;
        variants.push_back({"no_denoiser", c});
    }
    if (cfg.ablateL1) {
        BlindConfig c = cfg.blind;
        c.l1Enabled = false;
        variants.push_back({"no_l1", c});
    }
    for (const double g : cfg.gammas) {
        BlindConfig c = cfg.blind;
        c.gamma0 = g;
        char buf[40];
        std::snprintf(buf, sizeof buf, "gamma=%g", g);
        variants.push_back({buf, c});
    }
    for (const int cap : cfg.iterationCaps) {
        BlindConfig c = cfg.blind;
        c.maxIterations = cap;
        variants.push_back({"iters=" + std::to_string(cap), c});
    }
    return variants;
}

struct Cell {
    std::string image, kernel, variant;
    double alpha;
    BlindConfig cfg;
};

double psnrOrCap(double v) { return std::isfinite(v) ? v : 99.0; }

BenchRow runCell(const ExperimentConfig& cfg, const Cell& cell) {
    const Field2D x = load_image_spec(cell.image);
    const BlurKernel hTrue = parse_kernel_spec(cell.kernel, cell.cfg.kernelSize);

    const std::string key = cell.image + "|" + cell.kernel + "|" + fmtNum(cell.alpha);
    const uint64_t cellSeed = fnv1a(key, cfg.seed ^ 0x9e3779b97f4a7c15ull);
    const Field2D y = simulate(x, hTrue, PhotonLevel(cell.alpha), cellSeed);

    const RunReport report = run_blind(y, cell.alpha, cell.cfg, &x);

    const BlurKernel hInit = project_kernel(report.perIteration.front().kernel);
    BenchRow row;
    row.image = cell.image;
    row.kernel = cell.kernel;
    row.alpha = cell.alpha;
    row.variant = cell.variant;
    row.psnrInit = psnrOrCap(report.perIteration.front().psnr.value_or(0.0));
    row.psnrFinal = psnrOrCap(psnr(report.finalImage, x));
    row.ssimFinal = ssim(report.finalImage, x);
    row.maeInit = kernel_mae(hInit, hTrue, true).mae;
    row.maeFinal = kernel_mae(report.finalKernel, hTrue, true).mae;
    row.lossFirst = report.perIteration.front().loss;
    row.lossLast = report.perIteration.back().loss;
    row.iterations = static_cast<int>(report.perIteration.size()) - 1;
    row.aborted = report.aborted;

    if (cfg.emitImages || cfg.emitKernels || cfg.emitCurves) {
        namespace fs = std::filesystem;
        const fs::path dir =
            fs::path(cfg.outputDir) / "cells" / sanitize(key + "|" + cell.variant);
        fs::create_directories(dir);
        if (cfg.emitImages) {
            write_image_counts((dir / "y.png").string(), y);
            write_image_latent((dir / "xhat.png").string(), report.finalImage);
        }
        if (cfg.emitKernels) {
            save_kernel_text((dir / "kernel_est.txt").string(), report.finalKernel);
            save_kernel_text((dir / "kernel_true.txt").string(), hTrue);
        }
        if (cfg.emitCurves) {
            std::ofstream csv(dir / "loss.csv");
            csv << "iter,loss,mu,gamma,psnr\n";
            for (const auto& rec : report.perIteration) {
                csv << rec.k << "," << rec.loss << "," << rec.mu << "," << rec.gamma << ","
                    << (rec.psnr ? fmtNum(psnrOrCap(*rec.psnr)) : "") << "\n";
            }
        }
    }
    return row;
}

} // namespace

Field2D load_image_spec(const std::string& spec) {
    if (spec.rfind("synth:", 0) == 0) {
        const std::string body = spec.substr(6);
        const auto colon = body.find(':');
        const uint64_t seed = std::stoull(body.substr(0, colon));
        const int size = colon == std::string::npos ? 128 : std::stoi(body.substr(colon + 1));
        return make_scene(size, size, seed);
    }
    return read_image_latent(spec);
}

std::vector<BenchRow> run_bench(const ExperimentConfig& cfg) {
    if (cfg.images.empty() || cfg.kernels.empty() || cfg.alphas.empty())
        throw std::invalid_argument("run_bench: need at least one image, kernel and alpha");

    std::vector<Cell> cells;
    for (const auto& img : cfg.images)
        for (const auto& ker : cfg.kernels)
            for (const double alpha : cfg.alphas)
                for (const auto& variant : makeVariants(cfg))
                    cells.push_back({img, ker, variant.name, alpha, variant.cfg});

    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        return std::tie(a.image, a.kernel, a.alpha, a.variant) <
               std::tie(b.image, b.kernel, b.alpha, b.variant);
    });

    int threads = 1;
    if (const char* env = std::getenv("PLD_THREADS")) threads = std::max(1, std::atoi(env));
    threads = std::min<int>(threads, static_cast<int>(cells.size()));

    std::vector<BenchRow> rows(cells.size());
    if (threads <= 1) {
        for (size_t i = 0; i < cells.size(); ++i) rows[i] = runCell(cfg, cells[i]);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&]() {
                for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
                    rows[i] = runCell(cfg, cells[i]);
            });
        for (auto& th : pool) th.join();
    }
    return rows;
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "image,kernel,alpha,variant,psnr_init,psnr_final,ssim_final,mae_init,mae_final,"
           "loss_first,loss_last,iterations,aborted\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%g,%s,%.4f,%.4f,%.6f,%.8f,%.8f,%.8g,%.8g,%d,%d\n",
                      r.image.c_str(), r.kernel.c_str(), r.alpha, r.variant.c_str(), r.psnrInit,
                      r.psnrFinal, r.ssimFinal, r.maeInit, r.maeFinal, r.lossFirst, r.lossLast,
                      r.iterations, r.aborted ? 1 : 0);
        out << buf;
    }
    if (!out) throw IoError("failed writing " + path);
}

} // namespace pld
