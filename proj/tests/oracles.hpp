#pragma once

// Independent reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Naive weighted DBSCAN: core points by brute-force mass, clusters as
/// connected components of cores (union-find), each border point attached
/// to the adjacent component with the smallest core index.
inline std::vector<int> dbscan(const std::vector<Eigen::VectorXd>& pts, const std::vector<double>& w, double eps,
                               double min_weight) {
    const std::size_t n = pts.size();
    auto close = [&](std::size_t i, std::size_t j) {
        double d2 = 0.0;
        for (Eigen::Index k = 0; k < pts[i].size(); ++k) d2 += (pts[i](k) - pts[j](k)) * (pts[i](k) - pts[j](k));
        return std::sqrt(d2) <= eps;
    };
    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        double mass = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (close(i, j)) mass += w[j];
        core[i] = mass >= min_weight;
    }
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (core[i] && core[j] && close(i, j)) {
                auto a = find(i), b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
    // component id = smallest core index in it
    std::vector<std::optional<std::size_t>> comp(n);
    for (std::size_t i = 0; i < n; ++i)
        if (core[i]) comp[i] = find(i);
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        for (std::size_t j = 0; j < n; ++j)
            if (core[j] && close(i, j) && (!comp[i] || find(j) < *comp[i])) comp[i] = find(j);
    }
    std::map<std::size_t, int> ids;
    std::vector<int> labels(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (!comp[i]) continue;
        auto [it, fresh] = ids.try_emplace(*comp[i], static_cast<int>(ids.size()));
        labels[i] = it->second;
    }
    return labels;
}

/// True when a and b induce the same partition with noise (-1) fixed.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] == -1) != (b[i] == -1)) return false;
        if (a[i] == -1) continue;
        auto [x, fx] = ab.try_emplace(a[i], b[i]);
        auto [y, fy] = ba.try_emplace(b[i], a[i]);
        if (x->second != b[i] || y->second != a[i]) return false;
    }
    return true;
}

/// Direct Page-Hinkley recurrence. Returns the 1-based position (counted
/// from `from`) of the first alarm, or nullopt.
inline std::optional<int> pht_first_alarm(const std::vector<double>& xs, double delta, double thr,
                                          std::size_t from = 0) {
    double n = 0, m = 0, up = 0, up_min = 0, dn = 0, dn_max = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        n += 1;
        m = m + (xs[i] - m) / n;
        up = up + xs[i] - m - delta / 2;
        dn = dn + xs[i] - m + delta / 2;
        up_min = std::min(up_min, up);
        dn_max = std::max(dn_max, dn);
        if (up - up_min >= thr || dn_max - dn >= thr) {
            if (i >= from) return static_cast<int>(i - from) + 1;
            n = m = up = up_min = dn = dn_max = 0;
        }
    }
    return std::nullopt;
}

/// Radius of a set of unit-weight points: sqrt(mean squared distance to the mean).
inline double radius(const std::vector<Eigen::VectorXd>& pts) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(pts.front().size());
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    double s = 0.0;
    for (const auto& p : pts) s += (p - c).squaredNorm();
    return std::sqrt(s / static_cast<double>(pts.size()));
}

/// Entrywise ||M - HW||^2 with explicit loops.
inline double frobenius_residual(const Eigen::MatrixXd& M, const Eigen::MatrixXd& H, const Eigen::MatrixXd& W) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            double hw = 0.0;
            for (Eigen::Index k = 0; k < H.cols(); ++k) hw += H(i, k) * W(k, j);
            s += (M(i, j) - hw) * (M(i, j) - hw);
        }
    return s;
}

}  // namespace oracle
