// Builds one solution per regime and prints a few numbers from each.

#include <cstdio>

#include "hjgame/hjgame.hpp"

using namespace hjgame;

int main() {
    // Cooperative: both costs increase in x on every interval.
    const CostSpec coop = validate_spec({{0, 1}, {{1, 2}, {2, 1}, {1, 3}}, {}});
    std::printf("regime: %s\n", to_string(classify_regime(coop).regime).c_str());
    const auto sol = build_cooperative(coop);
    std::printf("  %zu pieces, residual %.2e, admissible %d\n", sol.pieces.size(), sol.report.hj_residual_sup,
                sol.report.admissible);
    for (double x : {-2.0, 0.0, 0.5, 1.0, 4.0}) {
        const Vec2 p = sol.p_at(x);
        std::printf("  p(%4.1f) = (%.6f, %.6f)\n", x, p.c1, p.c2);
    }
    const auto run = simulate_closed_loop(sol, 0.5, 40.0);
    std::printf("  from y = 0.5: J = (%.6f, %.6f)\n", run.costs.c1, run.costs.c2);

    // Conflicting, ordered so that a family exists.
    const CostSpec many = validate_spec({{0}, {{-2, 1}, {-1, 2}}, {}});
    std::printf("regime: %s\n", to_string(classify_regime(many).regime).c_str());
    for (double c : {0.02, 0.05}) {
        const auto m = build_conflicting_family(many, {-c, c});
        std::printf("  datum (%.2f, %.2f): p(1) = (%.6f, %.6f)\n", m.datum->c1, m.datum->c2, m.p_at(1.0).c1,
                    m.p_at(1.0).c2);
    }

    // Same slopes in the other order: no admissible solution.
    const CostSpec none = validate_spec({{0}, {{-1, 2}, {-2, 1}}, {}});
    const auto cert = certify_nonexistence(none, 50);
    std::printf("regime: %s, %zu/%zu probes inconsistent\n", to_string(classify_regime(none).regime).c_str(),
                cert.inconsistent_count, cert.probes.size());

    // Periodic costs built from a crossing of the two manifolds.
    const auto per = build_periodic({{-0.685, 0.729}, {-0.790, 0.613}});
    std::printf("periodic: period %.6f, admissible %d\n", per.cost.period(), per.solution.report.admissible);
    return 0;
}
