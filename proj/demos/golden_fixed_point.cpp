// Builds the golden reference system, checks the fixed-point property of the
// renormalisation operator and prints the partition-size decay.

#include <cstdio>

#include "gietlab/systems.hpp"

using namespace gietlab;

int main() {
    const System sys = make_golden_system();
    std::printf("system: %s, loop %s on %s, A = %s\n", sys.name.c_str(), sys.loop.word().c_str(),
                sys.loop.base.to_string().c_str(), sys.loop.matrix.to_string().c_str());
    std::printf("lengths: (%.15f, %.15f), perron %.15f\n", sys.t0.affine.lambda[0],
                sys.t0.affine.lambda[1], sys.spec.perron_value);

    const Giet rt = renormalize(sys.t0, sys.loop);
    std::printf("fixed point residuals: C0 = %.3e, C1 = %.3e\n", cr_distance(rt, sys.t0, 0),
                cr_distance(rt, sys.t0, 1));

    const RenormTrace tr = build_trace(sys.t0, sys.loop, 10);
    std::printf("%3s %-22s %-22s\n", "n", "x_n", "Delta_n");
    for (int n = 0; n <= tr.depth(); ++n) {
        const auto ps = partition_summary(tr, n);
        std::printf("%3d %-22.15g %-22.15g\n", n, tr.x(n), ps.delta);
    }
    return 0;
}
