// Acceptance suite: runs every release criterion at its pinned tolerance and
// prints one PASS/FAIL line per criterion. Exit code is the failure count.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "pld/blind.hpp"
#include "pld/gradcheck.hpp"
#include "pld/metrics.hpp"
#include "pld/synth.hpp"
#include "support/ssim_ref.hpp"
#include "support/testutil.hpp"

using namespace pld;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
                detail.c_str());
    if (!pass) ++failures;
}

double seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---- criterion 1: gradient fidelity ----------------------------------------

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    GradCheckOptions opt; // 50 instances, <=24x24, kernels <=7, K <= 4, alphas 10/20/40
    const GradCheckReport rep = run_gradient_check(opt);
    const double secs = seconds(t0);
    report(1, rep.pass && secs < 60.0, "reverse-mode gradient matches central differences",
           fmt("max rel err %.3e <= 1e-4 over %d instances, %.1f s", rep.maxRelError,
               rep.instances, secs));
}

// ---- criterion 2: convolution oracle ---------------------------------------

void criterion2() {
    test::Rng rng(20202);
    double worstConv = 0.0;
    for (int trial = 0; trial < 120; ++trial) {
        const int h = rng.integer(3, 32), w = rng.integer(3, 32);
        const int mMax = std::min({h, w, 9});
        const int m = 2 * rng.integer(0, (mMax - 1) / 2) + 1;
        const Field2D img = test::randomField(rng, h, w, -1.0, 1.0);
        const BlurKernel k = test::randomKernel(rng, m);
        const Field2D fft = convolve_circular(img, k);
        const Field2D direct = direct_convolve_oracle(img, k);
        double scale = maxAbs(direct);
        if (scale == 0.0) scale = 1.0;
        worstConv = std::max(worstConv, maxAbs(fft - direct) / scale);
    }

    double worstAdj = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int h = rng.integer(4, 24), w = rng.integer(4, 24);
        const Field2D x = test::randomField(rng, h, w, -1.0, 1.0);
        const Field2D z = test::randomField(rng, h, w, -1.0, 1.0);
        const BlurKernel k = test::randomKernel(rng, std::min({5, h, w}) % 2 ? std::min({5, h, w})
                                                                             : 3);
        double lhs = 0.0, rhs = 0.0;
        const Field2D hx = convolve_circular(x, k);
        const Field2D hz = correlate_circular(z, k);
        for (size_t i = 0; i < x.size(); ++i) {
            lhs += hx[i] * z[i];
            rhs += x[i] * hz[i];
        }
        worstAdj = std::max(worstAdj, std::fabs(lhs - rhs) / std::max(1.0, std::fabs(lhs)));
    }
    report(2, worstConv <= 1e-10 && worstAdj <= 1e-10, "FFT path matches direct sums and adjoint",
           fmt("conv err %.3e, adjoint err %.3e, both <= 1e-10", worstConv, worstAdj));
}

// ---- criterion 3: Richardson-Lucy properties --------------------------------

void criterion3() {
    test::Rng rng(30303);
    bool nllOk = true, fluxOk = true;
    double worstFlux = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const int n = rng.integer(16, 32);
        const Field2D x = test::randomField(rng, n, n, 0.1, 1.0);
        const BlurKernel k = test::randomKernel(rng, 5);
        const double alpha = (inst % 3 == 0) ? 10.0 : (inst % 3 == 1 ? 20.0 : 40.0);
        const Field2D y = simulate(x, k, PhotonLevel(alpha), 900 + inst);

        SolverConfig cfg;
        RichardsonLucySolver solver(cfg);
        UnrollTape tape;
        solver.forward(y, k.field(), alpha, tape);

        ConvPlan plan(n, n, k);
        double prev = std::numeric_limits<double>::infinity();
        for (const Field2D& xt : tape.x) {
            Field2D lam = plan.convolve(xt);
            for (size_t i = 0; i < lam.size(); ++i) lam[i] = alpha * lam[i] + cfg.epsilon;
            const double nll = poisson_nll(y, lam);
            if (nll > prev + 1e-9 * std::max(1.0, std::fabs(prev))) nllOk = false;
            prev = nll;

            const double flux = sum(xt);
            const double want = sum(y) / alpha;
            worstFlux = std::max(worstFlux, std::fabs(flux - want) / want);
        }
    }
    fluxOk = worstFlux <= 1e-8;

    // delta-kernel instance collapses to clip(y/alpha) from step one
    const Field2D x = test::randomField(rng, 24, 24, 0.1, 0.9);
    const BlurKernel delta = BlurKernel::delta(5);
    const Field2D y = simulate(x, delta, PhotonLevel(20.0), 77);
    const Field2D want = clip((1.0 / 20.0) * y, 0.0, 1.0);
    bool deltaOk = true;
    for (int k = 1; k <= 4; ++k) {
        SolverConfig cfg;
        cfg.unrollSteps = k;
        const Field2D got = solve(y, delta, PhotonLevel(20.0), cfg);
        if (maxAbs(got - want) > 1e-11) deltaOk = false;
    }

    report(3, nllOk && fluxOk && deltaOk, "RL monotone NLL, conserved flux, delta collapse",
           fmt("nll mono %d, flux err %.2e <= 1e-8, delta exact %d", nllOk, worstFlux, deltaOk));
}

// ---- criterion 4: shrinkage exactness ---------------------------------------

int ulpsApart(double a, double b) {
    int n = 0;
    while (a != b && n < 8) {
        a = std::nextafter(a, b);
        ++n;
    }
    return n;
}

void criterion4() {
    const bool ok = ulpsApart(shrinkage(0.5, 0.2), 0.3) <= 1 &&
                    shrinkage(-0.1, 0.2) == 0.0 &&
                    ulpsApart(shrinkage(0.15, 0.05), 0.1) <= 1;
    report(4, ok, "soft-threshold spot values exact to one ulp",
           fmt("S(0.5,.2)=%.17g S(-0.1,.2)=%g S(0.15,.05)=%.17g", shrinkage(0.5, 0.2),
               shrinkage(-0.1, 0.2), shrinkage(0.15, 0.05)));
}

// ---- criterion 5: schedule exactness ----------------------------------------

void criterion5() {
    const Field2D x = make_scene(48, 48, 505);
    const BlurKernel k = render_gaussian_kernel(GaussianBlurParams{1.5, 1.0, 0.4}, 9);
    const Field2D y = simulate(x, k, PhotonLevel(20.0), 505);
    BlindConfig cfg;
    cfg.kernelSize = 9;
    cfg.maxIterations = 20;
    cfg.solver.unrollSteps = 2;
    const RunReport rep = run_blind(y, 20.0, cfg, nullptr);
    const double mu = rep.perIteration.back().mu;
    const double gamma = rep.perIteration.back().gamma;
    const double muWant = 2.0 * std::pow(1.01, 20);
    const double gammaWant = 1e-3 / std::pow(1.01, 20);
    const bool ok = std::fabs(mu - muWant) <= 1e-10 * muWant &&
                    std::fabs(gamma - gammaWant) <= 1e-10 * gammaWant;
    report(5, ok, "mu and gamma compound exactly over 20 iterations",
           fmt("mu %.12f vs %.12f, gamma %.3e vs %.3e", mu, muWant, gamma, gammaWant));
}

// ---- criteria 6-8: end-to-end suite ------------------------------------------

struct SuiteCase {
    const char* kernel;
    double alpha;
    uint64_t seed;
};

// Ten synthetic instances, 128x128 scenes, kernels within 15x15 support.
const SuiteCase kSuite[] = {
    {"gauss:2.5,1.2,30", 10, 1},  {"gauss:2.2,1.4,70", 10, 2}, {"line:6,80", 10, 3},
    {"gauss:2.0,2.0,0", 20, 4},   {"gauss:3.0,1.0,90", 20, 5}, {"gauss:2.8,1.8,140", 20, 6},
    {"gauss:3.2,1.3,45", 40, 7},  {"gauss:2.6,1.0,10", 40, 8}, {"gauss:2.4,0.9,75", 40, 9},
    {"line:7,45", 40, 10},
};

void criteria678() {
    const auto t0 = std::chrono::steady_clock::now();
    int maeWins = 0, psnrWins = 0;
    bool backtrackMonotone = true;

    for (const SuiteCase& c : kSuite) {
        const Field2D x = make_scene(128, 128, 1000 + c.seed);
        BlindConfig cfg;
        cfg.kernelSize = 15;
        const BlurKernel hTrue = parse_kernel_spec(c.kernel, cfg.kernelSize);
        const Field2D y = simulate(x, hTrue, PhotonLevel(c.alpha), 555 + c.seed);
        const RunReport rep = run_blind(y, c.alpha, cfg, &x);

        const BlurKernel hInit = project_kernel(rep.perIteration.front().kernel);
        const double maeInit = kernel_mae(hInit, hTrue, true).mae;
        const double maeFinal = kernel_mae(rep.finalKernel, hTrue, true).mae;
        const double psnrInit = rep.perIteration.front().psnr.value_or(-1e9);
        const double psnrFinal = psnr(rep.finalImage, x);
        if (maeFinal <= maeInit) ++maeWins;
        if (psnrFinal >= psnrInit) ++psnrWins;

        for (size_t k = 1; k < rep.perIteration.size(); ++k)
            if (rep.perIteration[k].loss > rep.perIteration[k - 1].loss)
                backtrackMonotone = false;
    }
    const double secs6 = seconds(t0);
    report(6, maeWins >= 8 && psnrWins >= 8 && secs6 <= 600.0,
           "iterations beat initialization on the synthetic suite",
           fmt("MAE wins %d/10, PSNR wins %d/10, %.0f s <= 600 s", maeWins, psnrWins, secs6));

    // criterion 7: strict-mode fraction on the same suite
    int nonInc = 0, total = 0;
    for (const SuiteCase& c : kSuite) {
        const Field2D x = make_scene(128, 128, 1000 + c.seed);
        BlindConfig cfg;
        cfg.kernelSize = 15;
        cfg.backtracking = false;
        const BlurKernel hTrue = parse_kernel_spec(c.kernel, cfg.kernelSize);
        const Field2D y = simulate(x, hTrue, PhotonLevel(c.alpha), 555 + c.seed);
        const RunReport rep = run_blind(y, c.alpha, cfg, nullptr);
        for (size_t k = 1; k < rep.perIteration.size(); ++k) {
            if (rep.perIteration[k].loss <= rep.perIteration[k - 1].loss) ++nonInc;
            ++total;
        }
    }
    const double frac = 100.0 * nonInc / total;
    report(7, backtrackMonotone && frac >= 80.0,
           "loss is monotone with backtracking, mostly monotone in strict mode",
           fmt("backtracking monotone %d, strict non-increasing %d/%d = %.0f%% >= 80%%",
               backtrackMonotone, nonInc, total, frac));

    // criterion 8: denoiser target direction at alpha = 20
    double gap = 0.0;
    for (const SuiteCase& c : kSuite) {
        const Field2D x = make_scene(128, 128, 1000 + c.seed);
        BlindConfig cfg;
        cfg.kernelSize = 15;
        const BlurKernel hTrue = parse_kernel_spec(c.kernel, cfg.kernelSize);
        const Field2D y = simulate(x, hTrue, PhotonLevel(20.0), 555 + c.seed);
        const RunReport on = run_blind(y, 20.0, cfg, &x);
        BlindConfig noG = cfg;
        noG.denoiserEnabled = false;
        const RunReport off = run_blind(y, 20.0, noG, &x);
        gap += psnr(on.finalImage, x) - psnr(off.finalImage, x);
    }
    gap /= 10.0;
    report(8, gap >= 1.0, "denoised target beats the raw target at alpha 20",
           fmt("average gain %.2f dB >= 1 dB", gap));
}

// ---- criterion 9: photon-level estimator -------------------------------------

void criterion9() {
    test::Rng rng(90909);
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int h = rng.integer(4, 40), w = rng.integer(4, 40);
        Field2D y(h, w);
        double total = 0.0;
        for (size_t i = 0; i < y.size(); ++i) {
            y[i] = std::floor(rng.uniform(0.0, 50.0));
            total += y[i];
        }
        if (total == 0.0) y[0] = total = 1.0;
        const double want = total / (0.33 * static_cast<double>(y.size()));
        const double got = estimate_photon_level(y).alpha;
        worst = std::max(worst, std::fabs(got - want) / want);
        if (std::fabs(got - want) > 1e-10 * want) ok = false;
    }
    // spec spot value: y = 6.6 everywhere -> alpha-hat = 20
    const Field2D c66(10, 10, 6.6);
    const double spot = estimate_photon_level(c66).alpha;
    ok = ok && std::fabs(spot - 20.0) <= 1e-10 * 20.0;
    report(9, ok, "photon level equals sum(y)/(0.33 N)",
           fmt("worst rel err %.2e <= 1e-10, spot 6.6 -> %.12f", worst, spot));
}

// ---- criterion 10: metrics ----------------------------------------------------

void criterion10() {
    test::Rng rng(101010);
    bool ok = true;

    Field2D a(16, 16, 0.0), b(16, 16, 0.1);
    ok = ok && std::fabs(psnr(a, b) - 20.0) < 1e-12;
    const Field2D same = test::randomField(rng, 16, 16);
    ok = ok && std::isinf(psnr(same, same));
    ok = ok && ssim(same, same) == 1.0;

    const BlurKernel delta = BlurKernel::delta(7);
    const MaeResult identical = kernel_mae(delta, delta, true);
    ok = ok && identical.mae == 0.0 && identical.shiftRow == 0 && identical.shiftCol == 0;

    double worstSsim = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
        const Field2D u = test::randomField(rng, 20, 24);
        const Field2D v = test::randomField(rng, 20, 24);
        worstSsim = std::max(worstSsim, std::fabs(ssim(u, v) - test::ssimReference(u, v)));
    }
    ok = ok && worstSsim <= 1e-8;
    report(10, ok, "metric trivia exact, SSIM matches independent oracle",
           fmt("ssim oracle gap %.2e <= 1e-8", worstSsim));
}

} // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criteria678();
    criterion9();
    criterion10();
    std::printf("%d/10 criteria passed in %.0f s\n", 10 - failures, seconds(t0));
    return failures;
}
