#include "sievelab/occupancy.hpp"

#include <cmath>

#include "sievelab/errors.hpp"

namespace sievelab {

namespace {

constexpr std::uint64_t kTreeTag = 0x0CCA5CADEULL;
constexpr std::uint64_t kSticksWord = 0;
constexpr std::uint64_t kBallsWord = ~0ULL;
constexpr std::uint64_t kMaxRounds = 1'000'000;

struct Frame {
    std::uint64_t key = 0;
    int level = 0;  // level of this box; children live at level + 1
    std::uint64_t balls = 0;
    double position = 0.0;  // |log P(box)|
};

}  // namespace

std::vector<BoxChild> allocate_box(std::uint64_t m, const WeightLaw& law, Rng& rng) {
    if (m < 1) throw DomainError("allocate_box needs at least one ball");
    std::vector<BoxChild> out;
    std::uint64_t remaining = m;
    std::uint64_t r = 0;
    while (remaining > 0) {
        if (++r > kMaxRounds) throw CascadeStall("box allocation exceeded the round cap");
        const double w = law.sample(rng);
        const std::uint64_t k = rng.binomial(remaining, 1.0 - w);
        if (k > 0) out.push_back({r, k, w});
        remaining -= k;
    }
    return out;
}

CascadeOutput run_cascade(const SchemeConfig& cfg, std::optional<double> threshold_log,
                          bool record_first_level) {
    if (cfg.n < 1) throw DomainError("scheme needs n >= 1");
    if (cfg.j_max < 1) throw DomainError("scheme needs j_max >= 1");

    const int j_max = cfg.j_max;
    const bool with_rho = threshold_log.has_value();
    const double thr = threshold_log.value_or(0.0);

    CascadeOutput out;
    out.occupancy.n = cfg.n;
    out.occupancy.counts.assign(static_cast<std::size_t>(j_max), 0);
    out.level_ball_sums.assign(static_cast<std::size_t>(j_max), 0);
    if (with_rho) {
        out.rho = RhoProfile{};
        out.rho->threshold_log = thr;
        out.rho->counts.assign(static_cast<std::size_t>(j_max), 0);
    }

    std::vector<std::uint64_t> singleton_from(static_cast<std::size_t>(j_max) + 1, 0);
    int deepest_multi = cfg.n >= 2 ? 0 : -1;

    std::vector<Frame> stack;
    stack.push_back({derive_key(cfg.seed, kTreeTag), 0, cfg.n, 0.0});

    while (!stack.empty()) {
        const Frame box = stack.back();
        stack.pop_back();

        Rng sticks(derive_key(box.key, kSticksWord));
        Rng balls(derive_key(box.key, kBallsWord));

        const int child_level = box.level + 1;
        const bool rho_here = with_rho && box.position <= thr;
        std::uint64_t remaining = box.balls;
        double walk = 0.0;  // S_{r-1} within this box
        std::uint64_t r = 0;

        for (;;) {
            const bool need_balls = remaining > 0;
            const bool need_rho = rho_here && box.position + walk <= thr;
            if (!need_balls && !need_rho) break;
            if (++r > kMaxRounds)
                throw CascadeStall("cascade box exceeded the stick round cap");

            const double w = cfg.law.sample(sticks);
            const double child_pos = box.position + walk - std::log1p(-w);
            std::uint64_t k = 0;
            if (need_balls) {
                k = balls.binomial(remaining, 1.0 - w);
                remaining -= k;
            }
            const bool in_rho = rho_here && child_pos <= thr;

            if (k > 0 || in_rho) {
                const auto lvl = static_cast<std::size_t>(child_level) - 1;
                if (k > 0) {
                    out.occupancy.counts[lvl] += 1;
                    out.level_ball_sums[lvl] += k;
                    if (k >= 2) deepest_multi = std::max(deepest_multi, child_level);
                }
                if (in_rho) out.rho->counts[lvl] += 1;
                if (record_first_level && box.level == 0 && in_rho)
                    out.first_level_positions.push_back(child_pos);

                if (child_level < j_max) {
                    const bool expand_balls = k >= 2;
                    if (k == 1) singleton_from[static_cast<std::size_t>(child_level)] += 1;
                    if (expand_balls || in_rho)
                        stack.push_back({derive_key(box.key, r), child_level,
                                         expand_balls ? k : 0, child_pos});
                }
            }
            walk -= std::log(w);
        }
    }

    // A box born with a single ball stays a single occupied box (holding that
    // ball) at every level strictly below its birth level.
    std::uint64_t carried = 0;
    for (int j = 1; j <= j_max; ++j) {
        carried += singleton_from[static_cast<std::size_t>(j) - 1];
        out.occupancy.counts[static_cast<std::size_t>(j) - 1] += carried;
        out.level_ball_sums[static_cast<std::size_t>(j) - 1] += carried;
    }

    if (cfg.n >= 2 && deepest_multi < j_max)
        out.occupancy.height = deepest_multi + 1;
    return out;
}

OccupancyProfile simulate_occupancy(const SchemeConfig& cfg) {
    return run_cascade(cfg, std::nullopt).occupancy;
}

RhoProfile count_rho(const SchemeConfig& cfg, double t) {
    if (!(t >= 1.0)) throw DomainError("count_rho needs threshold t >= 1");
    SchemeConfig weights_only = cfg;
    weights_only.n = 1;  // ball placement is irrelevant for rho
    auto res = run_cascade(weights_only, std::log(t));
    return std::move(*res.rho);
}

YDecomposition decompose_Y(const SchemeConfig& cfg, int j, const RenewalTables& tables) {
    if (j < 1 || j > cfg.j_max) throw DomainError("decompose_Y level outside j_max");
    const double t = std::log(static_cast<double>(cfg.n));
    if (t > tables.t_max() + 1e-9) throw GridTooShort("log n exceeds the grid");
    if (j > tables.j_max()) throw DomainError("tables lack V_j for the requested level");

    const auto res = run_cascade(cfg, t, /*record_first_level=*/true);
    const GridFunction& v_prev = tables.Vj(j - 1);

    YDecomposition d;
    d.occupied = res.occupancy.counts[static_cast<std::size_t>(j) - 1];
    d.rho = res.rho->counts[static_cast<std::size_t>(j) - 1];
    double sum = 0.0;
    for (const double pos : res.first_level_positions) sum += v_prev(t - pos);
    d.centering_sum = sum;
    d.vj_at_log_n = tables.Vj(j)(t);
    d.y1 = static_cast<double>(d.occupied) - static_cast<double>(d.rho);
    d.y2 = static_cast<double>(d.rho) - d.centering_sum;
    d.y3 = d.centering_sum - d.vj_at_log_n;
    return d;
}

}  // namespace sievelab
