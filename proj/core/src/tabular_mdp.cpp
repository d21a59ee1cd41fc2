#include "cmaa2c/tabular_mdp.hpp"

#include <cmath>

#include "cmaa2c/errors.hpp"

namespace cmaa2c::env {

void TabularMdp::validate() const {
    const auto s = transition.rows();
    require(s > 0 && transition.cols() == s, "TabularMdp: transition matrix must be square and nonempty");
    require(initial.size() == s, "TabularMdp: initial distribution has wrong length");
    require(constraint.rows() == s && constraint.cols() >= 1, "TabularMdp: constraint table must be S x m");
    require((transition.array() >= 0.0).all() && (initial.array() >= 0.0).all(),
            "TabularMdp: probabilities must be nonnegative");
    for (Eigen::Index r = 0; r < s; ++r)
        require(std::abs(transition.row(r).sum() - 1.0) <= 1e-12,
                "TabularMdp: row " + std::to_string(r) + " of P does not sum to 1");
    require(std::abs(initial.sum() - 1.0) <= 1e-12, "TabularMdp: p0 does not sum to 1");
}

TabularMdp TabularMdp::random(int states, Rng& rng) {
    require(states >= 1, "TabularMdp::random: need at least one state");
    TabularMdp mdp;
    mdp.transition.resize(states, states);
    for (int r = 0; r < states; ++r) {
        for (int c = 0; c < states; ++c) mdp.transition(r, c) = -std::log(1.0 - uniform01(rng));
        mdp.transition.row(r) /= mdp.transition.row(r).sum();
    }
    mdp.initial.resize(states);
    for (int s = 0; s < states; ++s) mdp.initial(s) = -std::log(1.0 - uniform01(rng));
    mdp.initial /= mdp.initial.sum();
    mdp.constraint.resize(states, 1);
    for (int s = 0; s < states; ++s) mdp.constraint(s, 0) = uniform(rng, -1.0, 1.0);
    return mdp;
}

TabularMdp TabularMdp::alternating() {
    TabularMdp mdp;
    mdp.transition.resize(2, 2);
    mdp.transition << 0.0, 1.0, 1.0, 0.0;
    mdp.initial.resize(2);
    mdp.initial << 1.0, 0.0;
    mdp.constraint.resize(2, 1);
    mdp.constraint << 0.0, 1.0;
    return mdp;
}

TabularMdp TabularMdp::builtin_ergodic() {
    TabularMdp mdp;
    mdp.transition.resize(3, 3);
    mdp.transition << 0.5, 0.5, 0.0,
                      0.25, 0.5, 0.25,
                      0.0, 0.5, 0.5;
    mdp.initial.resize(3);
    mdp.initial << 1.0, 0.0, 0.0;
    mdp.constraint.resize(3, 1);
    mdp.constraint << -1.0, 0.0, 1.0;
    return mdp;
}

TabularMdp TabularMdp::builtin_two_state() {
    TabularMdp mdp;
    mdp.transition.resize(2, 2);
    mdp.transition << 0.7, 0.3,
                      0.4, 0.6;
    mdp.initial.resize(2);
    mdp.initial << 1.0, 0.0;
    mdp.constraint.resize(2, 1);
    mdp.constraint << -1.0, 1.0;
    return mdp;
}

int sample_index(const Vector& probabilities, Rng& rng) {
    const double u = uniform01(rng);
    double cumulative = 0.0;
    for (Eigen::Index k = 0; k < probabilities.size(); ++k) {
        cumulative += probabilities(k);
        if (u < cumulative) return static_cast<int>(k);
    }
    // Rounding left u above the final cumulative sum: take the last index with mass.
    for (Eigen::Index k = probabilities.size(); k-- > 0;)
        if (probabilities(k) > 0.0) return static_cast<int>(k);
    return static_cast<int>(probabilities.size()) - 1;
}

std::vector<int> tabular_rollout(const TabularMdp& mdp, int horizon, Rng& rng) {
    mdp.validate();
    require(horizon >= 0, "tabular_rollout: horizon must be >= 0");
    std::vector<int> path;
    path.reserve(static_cast<std::size_t>(horizon) + 1);
    int s = sample_index(mdp.initial, rng);
    path.push_back(s);
    for (int t = 0; t < horizon; ++t) {
        s = sample_index(mdp.transition.row(s).transpose(), rng);
        path.push_back(s);
    }
    return path;
}

}  // namespace cmaa2c::env
