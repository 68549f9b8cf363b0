#pragma once

#include "pld/config.hpp"

namespace pld {

struct BenchRow {
    std::string image;
    std::string kernel;
    double alpha;
    std::string variant;
    double psnrInit;
    double psnrFinal;
    double ssimFinal;
    double maeInit;
    double maeFinal;
    double lossFirst;
    double lossLast;
    int iterations;
    bool aborted;
};

// Full sweep: images x kernels x alphas x variants. "full" and "init_only"
// always run; the config's ablation axes add variants. Cells are independent
// and may run on PLD_THREADS workers; row order is sorted by cell key either
// way. Deterministic for a fixed config.
std::vector<BenchRow> run_bench(const ExperimentConfig& cfg);

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);

// "synth:<seed>[:<size>]" or an image path.
Field2D load_image_spec(const std::string& spec);

} // namespace pld
