#pragma once

// DenStream: damped-window density clustering over micro-clusters, with a
// weighted DBSCAN pass over potential micro-cluster centers for the final
// clusters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dendrift/errors.hpp"
#include "dendrift/latent_io.hpp"

namespace dendrift {

struct DenStreamParams {
    double decay_rate = 0.1;  // lambda in 2^(-lambda * dt)
    double epsilon = 0.5;     // max micro-cluster radius
    double beta = 0.8;
    double mu = 3.0;
    std::optional<double> offline_eps;         // defaults to 2 * epsilon
    std::optional<double> offline_min_weight;  // defaults to mu

    double dbscan_eps() const { return offline_eps.value_or(2.0 * epsilon); }
    double dbscan_min_weight() const { return offline_min_weight.value_or(mu); }
    double potential_threshold() const { return beta * mu; }

    void validate() const {
        if (!(decay_rate > 0.0)) throw InvalidArgument("DenStream: decay rate must be > 0");
        if (!(epsilon > 0.0)) throw InvalidArgument("DenStream: epsilon must be > 0");
        if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("DenStream: beta must be in (0, 1]");
        if (!(mu > 0.0)) throw InvalidArgument("DenStream: mu must be > 0");
        if (!(beta * mu > 1.0)) throw InvalidArgument("DenStream: beta * mu must exceed 1");
        if (!(dbscan_eps() > 0.0)) throw InvalidArgument("DenStream: offline eps must be > 0");
        if (!(dbscan_min_weight() > 0.0)) throw InvalidArgument("DenStream: offline min weight must be > 0");
    }
};

/// Minimal time span between pruning checks:
/// ceil((1 / lambda) * log2(beta*mu / (beta*mu - 1))).
inline std::int64_t pruning_period(const DenStreamParams& p) {
    const double bm = p.beta * p.mu;
    const double tp = std::ceil((1.0 / p.decay_rate) * std::log2(bm / (bm - 1.0)));
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(tp));
}

inline double fading(double decay_rate, double dt) { return std::exp2(-decay_rate * dt); }

struct MicroCluster {
    Eigen::VectorXd cf1;  // weighted linear sum
    Eigen::VectorXd cf2;  // weighted sum of squares, per coordinate
    double weight = 0.0;
    std::int64_t created_at = 0;
    std::int64_t last_update = 0;

    static MicroCluster from_point(const Eigen::VectorXd& x, std::int64_t t) {
        return {x, x.cwiseAbs2(), 1.0, t, t};
    }

    Eigen::Index dim() const { return cf1.size(); }

    Eigen::VectorXd center() const { return cf1 / weight; }

    double radius() const {
        if (weight <= 0.0) return 0.0;
        const double r2 = cf2.sum() / weight - (cf1 / weight).squaredNorm();
        return std::sqrt(std::max(0.0, r2));
    }

    /// Radius the cluster would have after absorbing `x` with unit weight.
    double radius_with(const Eigen::VectorXd& x) const {
        const double w = weight + 1.0;
        const double r2 = (cf2.sum() + x.squaredNorm()) / w - ((cf1 + x) / w).squaredNorm();
        return std::sqrt(std::max(0.0, r2));
    }

    void absorb(const Eigen::VectorXd& x) {
        cf1 += x;
        cf2 += x.cwiseAbs2();
        weight += 1.0;
    }
};

/// Fades cf1, cf2 and weight by 2^(-lambda * (t - last_update)).
inline MicroCluster decay_to(const MicroCluster& mc, std::int64_t t, double decay_rate) {
    if (t < mc.last_update) {
        throw TimeOrderError("decay_to: t=" + std::to_string(t) + " precedes last update " +
                             std::to_string(mc.last_update));
    }
    MicroCluster out = mc;
    if (t == mc.last_update) return out;
    const double f = fading(decay_rate, static_cast<double>(t - mc.last_update));
    out.cf1 *= f;
    out.cf2 *= f;
    out.weight *= f;
    out.last_update = t;
    return out;
}

/// Lower weight limit for an outlier micro-cluster created at t0, checked at t.
inline double outlier_weight_limit(std::int64_t t, std::int64_t t0, std::int64_t period, double decay_rate) {
    const double num = std::exp2(-decay_rate * static_cast<double>(t - t0 + period)) - 1.0;
    const double den = std::exp2(-decay_rate * static_cast<double>(period)) - 1.0;
    return num / den;
}

inline constexpr int kNoise = -1;

/// Weighted DBSCAN. A point is core when the summed weight of points within
/// `eps` (itself included) reaches `min_weight`. Clusters are grown from the
/// lowest-index unvisited core point; border points join the first cluster
/// that reaches them. Returns cluster ids 0.. in creation order, -1 for noise.
inline std::vector<int> dbscan(std::span<const Eigen::VectorXd> points, std::span<const double> weights,
                               double eps, double min_weight) {
    if (points.size() != weights.size()) throw DimensionError("dbscan: points/weights size mismatch");
    const std::size_t n = points.size();
    const double eps2 = eps * eps;

    std::vector<std::vector<std::size_t>> neighbors(n);
    std::vector<char> core(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double mass = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if ((points[i] - points[j]).squaredNorm() <= eps2) {
                neighbors[i].push_back(j);
                mass += weights[j];
            }
        }
        core[i] = mass >= min_weight;
    }

    std::vector<int> labels(n, kNoise);
    std::vector<char> assigned(n, 0);
    int next_id = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (!core[seed] || assigned[seed]) continue;
        const int id = next_id++;
        std::deque<std::size_t> frontier{seed};
        assigned[seed] = 1;
        labels[seed] = id;
        while (!frontier.empty()) {
            const auto p = frontier.front();
            frontier.pop_front();
            if (!core[p]) continue;
            for (const auto q : neighbors[p]) {
                if (assigned[q]) continue;
                assigned[q] = 1;
                labels[q] = id;
                frontier.push_back(q);
            }
        }
    }
    return labels;
}

enum class MergeOutcome { AbsorbedByPotential, AbsorbedByOutlier, NewOutlier, Promoted };

inline const char* to_string(MergeOutcome o) {
    switch (o) {
        case MergeOutcome::AbsorbedByPotential: return "absorbed-by-potential";
        case MergeOutcome::AbsorbedByOutlier: return "absorbed-by-outlier";
        case MergeOutcome::NewOutlier: return "new-outlier";
        case MergeOutcome::Promoted: return "promoted";
    }
    return "?";
}

struct FinalClusters {
    std::vector<Eigen::VectorXd> centers;  // one per potential micro-cluster
    std::vector<double> weights;
    std::vector<int> labels;  // cluster id or kNoise
    int cluster_count = 0;

    /// Cluster of the nearest non-noise center within `radius`, else kNoise.
    int assign(const Eigen::VectorXd& x, double radius) const {
        int best = kNoise;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < centers.size(); ++i) {
            if (labels[i] == kNoise) continue;
            const double d2 = (centers[i] - x).squaredNorm();
            if (d2 < best_d2) {
                best_d2 = d2;
                best = labels[i];
            }
        }
        return best_d2 <= radius * radius ? best : kNoise;
    }
};

class ClusterModel {
public:
    explicit ClusterModel(DenStreamParams params) : params_(std::move(params)) {
        params_.validate();
        period_ = dendrift::pruning_period(params_);
    }

    const DenStreamParams& params() const noexcept { return params_; }
    std::int64_t pruning_period() const noexcept { return period_; }
    const std::vector<MicroCluster>& potential() const noexcept { return potential_; }
    const std::vector<MicroCluster>& outliers() const noexcept { return outliers_; }
    std::optional<std::int64_t> now() const noexcept { return now_; }
    bool empty() const noexcept { return potential_.empty() && outliers_.empty(); }

    MergeOutcome merge_point(const Eigen::VectorXd& x, std::int64_t t) {
        if (!x.allFinite()) throw InvalidArgument("merge_point: non-finite point");
        if (dim_ && x.size() != *dim_) {
            throw DimensionError("merge_point: point has dimension " + std::to_string(x.size()) +
                                 ", model has " + std::to_string(*dim_));
        }
        advance(t);
        dim_ = x.size();

        if (auto i = nearest(potential_, x)) {
            auto& mc = potential_[*i];
            mc = decay_to(mc, t, params_.decay_rate);
            if (mc.radius_with(x) <= params_.epsilon) {
                mc.absorb(x);
                return MergeOutcome::AbsorbedByPotential;
            }
        }
        if (auto i = nearest(outliers_, x)) {
            auto& mc = outliers_[*i];
            mc = decay_to(mc, t, params_.decay_rate);
            if (mc.radius_with(x) <= params_.epsilon) {
                mc.absorb(x);
                if (mc.weight > params_.potential_threshold()) {
                    potential_.push_back(std::move(mc));
                    outliers_.erase(outliers_.begin() + static_cast<std::ptrdiff_t>(*i));
                    return MergeOutcome::Promoted;
                }
                return MergeOutcome::AbsorbedByOutlier;
            }
        }
        outliers_.push_back(MicroCluster::from_point(x, t));
        return MergeOutcome::NewOutlier;
    }

    /// Merges every row of `points` at time `t`.
    void merge(const Eigen::MatrixXd& points, std::int64_t t) {
        for (Eigen::Index i = 0; i < points.rows(); ++i) merge_point(points.row(i).transpose(), t);
    }

    /// Drops potential micro-clusters whose faded weight fell below beta*mu and
    /// outlier micro-clusters below their creation-time dependent limit.
    void prune(std::int64_t t) {
        advance(t);
        const double floor = params_.potential_threshold();
        std::erase_if(potential_, [&](MicroCluster& mc) {
            mc = decay_to(mc, t, params_.decay_rate);
            return mc.weight < floor;
        });
        std::erase_if(outliers_, [&](MicroCluster& mc) {
            mc = decay_to(mc, t, params_.decay_rate);
            return mc.weight < outlier_weight_limit(t, mc.created_at, period_, params_.decay_rate);
        });
    }

    /// Discards all micro-clusters. Parameters and the current time are kept.
    void reset() {
        potential_.clear();
        outliers_.clear();
        dim_.reset();
    }

    /// Sum of all micro-cluster weights faded to time `t`.
    double total_weight(std::int64_t t) const {
        double sum = 0.0;
        for (const auto* group : {&potential_, &outliers_}) {
            for (const auto& mc : *group) sum += decay_to(mc, t, params_.decay_rate).weight;
        }
        return sum;
    }

    /// Weighted DBSCAN over potential micro-cluster centers, weights faded to
    /// the model's current time.
    FinalClusters offline_cluster() const {
        FinalClusters out;
        const auto t = now_.value_or(0);
        for (const auto& mc : potential_) {
            const auto faded = decay_to(mc, std::max(t, mc.last_update), params_.decay_rate);
            out.centers.push_back(faded.center());
            out.weights.push_back(faded.weight);
        }
        out.labels = dbscan(out.centers, out.weights, params_.dbscan_eps(), params_.dbscan_min_weight());
        for (const int l : out.labels) out.cluster_count = std::max(out.cluster_count, l + 1);
        return out;
    }

private:
    void advance(std::int64_t t) {
        if (now_ && t < *now_) {
            throw TimeOrderError("ClusterModel: time " + std::to_string(t) + " precedes " + std::to_string(*now_));
        }
        now_ = t;
    }

    static std::optional<std::size_t> nearest(const std::vector<MicroCluster>& group, const Eigen::VectorXd& x) {
        std::optional<std::size_t> best;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < group.size(); ++i) {
            const double d2 = (group[i].center() - x).squaredNorm();
            if (d2 < best_d2 || (d2 == best_d2 && best && group[i].created_at < group[*best].created_at)) {
                best_d2 = d2;
                best = i;
            }
        }
        return best;
    }

    DenStreamParams params_;
    std::int64_t period_ = 1;
    std::vector<MicroCluster> potential_;
    std::vector<MicroCluster> outliers_;
    std::optional<Eigen::Index> dim_;
    std::optional<std::int64_t> now_;
};

/// CSV "cluster_id,weight,center_f0..": one line per potential micro-cluster.
inline void write_cluster_snapshot(std::ostream& out, const FinalClusters& fc) {
    const std::size_t k = fc.centers.empty() ? 0 : static_cast<std::size_t>(fc.centers.front().size());
    out << "cluster_id,weight";
    for (std::size_t j = 0; j < k; ++j) out << ",center_f" << j;
    out << '\n';
    for (std::size_t i = 0; i < fc.centers.size(); ++i) {
        out << fc.labels[i] << ',' << format_real(fc.weights[i]);
        for (Eigen::Index j = 0; j < fc.centers[i].size(); ++j) out << ',' << format_real(fc.centers[i](j));
        out << '\n';
    }
}

}  // namespace dendrift
