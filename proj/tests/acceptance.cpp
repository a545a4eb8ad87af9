// Acceptance suite: every criterion of the laboratory run end to end at its
// pinned tolerance, one verdict line per criterion. Exit status 0 only if
// every criterion passes.

#include <chrono>
#include <cstdio>

#include "gietlab/lab.hpp"

using namespace gietlab;

namespace {

constexpr std::uint64_t kSeed = 20260809;

struct Tally {
    int passed = 0;
    int failed = 0;
};

void report(Tally& tally, const CheckResult& r, double seconds) {
    std::printf("[%s] %-4s %-34s (%6.1fs)  %s\n", r.pass ? "PASS" : "FAIL", r.id.c_str(),
                r.name.c_str(), seconds, r.detail.c_str());
    std::fflush(stdout);
    (r.pass ? tally.passed : tally.failed) += 1;
}

template <typename F>
void run(Tally& tally, F&& make) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    try {
        r = make();
    } catch (const Error& e) {
        r.id = "ERR";
        r.name = "criterion threw";
        r.pass = false;
        r.detail = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(tally, r, secs);
}

}  // namespace

int main() {
    Tally tally;
    std::printf("gietlab acceptance suite (seed %llu)\n", static_cast<unsigned long long>(kSeed));

    run(tally, [] { return checks::fixed_point(); });
    run(tally, [] { return checks::intersection_matrix(); });
    run(tally, [] { return checks::splitting_dimensions(); });
    run(tally, [] { return checks::slope_cocycle_batch(kSeed, 1e-3, 100, 1); });
    run(tally, [] { return checks::estimate_battery(kSeed); });
    run(tally, [] { return checks::eta_lipschitz_batch(kSeed, 50); });
    run(tally, [] { return checks::shadowing_batch(kSeed, 10, 1); });
    run(tally, [] { return checks::delta_decay(kSeed); });
    run(tally, [] { return checks::conjugacy_batch(kSeed, 2); });
    run(tally, [] { return checks::ratio_test(kSeed); });
    run(tally, [] { return checks::backend_agreement(kSeed); });

    std::printf("%d passed, %d failed\n", tally.passed, tally.failed);
    return tally.failed == 0 ? 0 : 1;
}
