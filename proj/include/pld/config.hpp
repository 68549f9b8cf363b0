#pragma once

#include <map>
#include <string>
#include <vector>

#include "pld/blind.hpp"

namespace pld {

// Flat key=value text, '#' comments, one pair per line.
std::map<std::string, std::string> parse_key_value(const std::string& text);
std::map<std::string, std::string> parse_key_value_file(const std::string& path);

// Applies recognized keys onto a BlindConfig; unknown keys throw.
void apply_blind_config(BlindConfig& cfg, const std::map<std::string, std::string>& kv);

struct ExperimentConfig {
    std::vector<std::string> images;  // image paths or "synth:<seed>[:<size>]" specs
    std::vector<std::string> kernels; // kernel specs (see parse_kernel_spec)
    std::vector<double> alphas = {10.0, 20.0, 40.0};
    uint64_t seed = 7;
    std::string outputDir = "bench_out";
    bool emitImages = false;
    bool emitKernels = false;
    bool emitCsv = true;
    bool emitCurves = false;

    // ablation axes; "full" and "init_only" variants always run
    std::vector<double> gammas;
    std::vector<int> iterationCaps;
    bool ablateDenoiser = false;
    bool ablateL1 = false;

    BlindConfig blind;

    bool operator==(const ExperimentConfig&) const = default;

    static ExperimentConfig from_file(const std::string& path);
    void to_file(const std::string& path) const;
};

} // namespace pld
