#include "pld/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pld/io.hpp"

namespace pld {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool parseBool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw std::invalid_argument("config: bad boolean '" + v + "'");
}

std::vector<std::string> splitList(const std::string& v, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, sep)) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string joinDoubles(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
    return out;
}

std::string joinInts(const std::vector<int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::string joinStrings(const std::vector<std::string>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + v[i];
    return out;
}

} // namespace

std::map<std::string, std::string> parse_key_value(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key=value, got '" + line + "'");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

std::map<std::string, std::string> parse_key_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_value(ss.str());
}

void apply_blind_config(BlindConfig& cfg, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "max_iterations") cfg.maxIterations = std::stoi(value);
        else if (key == "step_size") cfg.stepSize = std::stod(value);
        else if (key == "kernel_size") cfg.kernelSize = std::stoi(value);
        else if (key == "l1_enabled") cfg.l1Enabled = parseBool(value);
        else if (key == "denoiser_enabled") cfg.denoiserEnabled = parseBool(value);
        else if (key == "backtracking") cfg.backtracking = parseBool(value);
        else if (key == "mu0") cfg.mu0 = std::stod(value);
        else if (key == "gamma0") cfg.gamma0 = std::stod(value);
        else if (key == "photon_beta") cfg.photonBeta = std::stod(value);
        else if (key == "unroll_steps") cfg.solver.unrollSteps = std::stoi(value);
        else if (key == "epsilon") cfg.solver.epsilon = std::stod(value);
        else if (key == "boundary") {
            if (value == "circular") cfg.solver.boundary = Boundary::circular;
            else if (value == "symmetric") cfg.solver.boundary = Boundary::symmetric;
            else throw std::invalid_argument("config: boundary must be circular|symmetric");
        } else if (key == "solver") {
            if (value == "rl") cfg.solver.kind = SolverKind::richardson_lucy;
            else if (value == "gd") cfg.solver.kind = SolverKind::gradient_descent;
            else throw std::invalid_argument("config: solver must be rl|gd");
        } else if (key == "gd_step_scale") cfg.solver.gdStepScale = std::stod(value);
        else if (key == "gd_prior") cfg.solver.gdPrior = std::stod(value);
        else if (key == "tv_weight") cfg.denoise.tvWeight = std::stod(value);
        else if (key == "tv_iterations") cfg.denoise.tvIterations = std::stoi(value);
        else if (key == "denoise_mode") {
            if (value == "anscombe_tv") cfg.denoise.mode = DenoiseMode::anscombe_tv;
            else if (value == "passthrough") cfg.denoise.mode = DenoiseMode::passthrough;
            else throw std::invalid_argument("config: denoise_mode must be anscombe_tv|passthrough");
        } else if (key == "init_c") cfg.init.c = std::stod(value);
        else if (key == "init_b") cfg.init.b = std::stod(value);
        else if (key == "init_sigma_min") cfg.init.sigmaMin = std::stod(value);
        else if (key == "init_sigma_max") cfg.init.sigmaMax = std::stod(value);
        else if (key == "init_directions") cfg.init.directions = std::stoi(value);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

namespace {

// Keys consumed by the experiment layer; everything else is BlindConfig.
const char* kExperimentKeys[] = {"images",       "kernels",     "alphas",        "seed",
                                 "output_dir",   "emit_images", "emit_kernels",  "emit_csv",
                                 "emit_curves",  "gammas",      "iteration_caps", "ablate_denoiser",
                                 "ablate_l1"};

bool isExperimentKey(const std::string& k) {
    for (const char* e : kExperimentKeys)
        if (k == e) return true;
    return false;
}

} // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    const auto kv = parse_key_value_file(path);
    ExperimentConfig cfg;
    std::map<std::string, std::string> blindKv;
    for (const auto& [key, value] : kv) {
        if (!isExperimentKey(key)) {
            blindKv[key] = value;
            continue;
        }
        if (key == "images") cfg.images = splitList(value, ';');
        else if (key == "kernels") cfg.kernels = splitList(value, ';');
        else if (key == "alphas") {
            cfg.alphas.clear();
            for (const auto& t : splitList(value)) cfg.alphas.push_back(std::stod(t));
        } else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "output_dir") cfg.outputDir = value;
        else if (key == "emit_images") cfg.emitImages = parseBool(value);
        else if (key == "emit_kernels") cfg.emitKernels = parseBool(value);
        else if (key == "emit_csv") cfg.emitCsv = parseBool(value);
        else if (key == "emit_curves") cfg.emitCurves = parseBool(value);
        else if (key == "gammas") {
            for (const auto& t : splitList(value)) cfg.gammas.push_back(std::stod(t));
        } else if (key == "iteration_caps") {
            for (const auto& t : splitList(value)) cfg.iterationCaps.push_back(std::stoi(t));
        } else if (key == "ablate_denoiser") cfg.ablateDenoiser = parseBool(value);
        else if (key == "ablate_l1") cfg.ablateL1 = parseBool(value);
    }
    apply_blind_config(cfg.blind, blindKv);
    return cfg;
}

void ExperimentConfig::to_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "images=" << joinStrings(images) << "\n";
    out << "kernels=" << joinStrings(kernels) << "\n";
    out << "alphas=" << joinDoubles(alphas) << "\n";
    out << "seed=" << seed << "\n";
    out << "output_dir=" << outputDir << "\n";
    out << "emit_images=" << (emitImages ? 1 : 0) << "\n";
    out << "emit_kernels=" << (emitKernels ? 1 : 0) << "\n";
    out << "emit_csv=" << (emitCsv ? 1 : 0) << "\n";
    out << "emit_curves=" << (emitCurves ? 1 : 0) << "\n";
    if (!gammas.empty()) out << "gammas=" << joinDoubles(gammas) << "\n";
    if (!iterationCaps.empty()) out << "iteration_caps=" << joinInts(iterationCaps) << "\n";
    out << "ablate_denoiser=" << (ablateDenoiser ? 1 : 0) << "\n";
    out << "ablate_l1=" << (ablateL1 ? 1 : 0) << "\n";
    out << "max_iterations=" << blind.maxIterations << "\n";
    out << "step_size=" << fmt(blind.stepSize) << "\n";
    out << "kernel_size=" << blind.kernelSize << "\n";
    out << "l1_enabled=" << (blind.l1Enabled ? 1 : 0) << "\n";
    out << "denoiser_enabled=" << (blind.denoiserEnabled ? 1 : 0) << "\n";
    out << "backtracking=" << (blind.backtracking ? 1 : 0) << "\n";
    out << "mu0=" << fmt(blind.mu0) << "\n";
    out << "gamma0=" << fmt(blind.gamma0) << "\n";
    out << "photon_beta=" << fmt(blind.photonBeta) << "\n";
    out << "unroll_steps=" << blind.solver.unrollSteps << "\n";
    out << "epsilon=" << fmt(blind.solver.epsilon) << "\n";
    out << "boundary=" << (blind.solver.boundary == Boundary::symmetric ? "symmetric" : "circular")
        << "\n";
    out << "solver=" << (blind.solver.kind == SolverKind::gradient_descent ? "gd" : "rl") << "\n";
    out << "gd_step_scale=" << fmt(blind.solver.gdStepScale) << "\n";
    out << "gd_prior=" << fmt(blind.solver.gdPrior) << "\n";
    out << "tv_weight=" << fmt(blind.denoise.tvWeight) << "\n";
    out << "tv_iterations=" << blind.denoise.tvIterations << "\n";
    out << "denoise_mode="
        << (blind.denoise.mode == DenoiseMode::passthrough ? "passthrough" : "anscombe_tv") << "\n";
    out << "init_c=" << fmt(blind.init.c) << "\n";
    out << "init_b=" << fmt(blind.init.b) << "\n";
    out << "init_sigma_min=" << fmt(blind.init.sigmaMin) << "\n";
    out << "init_sigma_max=" << fmt(blind.init.sigmaMax) << "\n";
    out << "init_directions=" << blind.init.directions << "\n";
    if (!out) throw IoError("failed writing " + path);
}

} // namespace pld
