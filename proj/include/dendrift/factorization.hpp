#pragma once

// Non-negative matrix factorization M ~ H * W under the squared Frobenius
// objective, solved with Lee-Seung multiplicative updates.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dendrift/errors.hpp"
#include "dendrift/event_ingest.hpp"

namespace dendrift {

struct FactorizationResult {
    Eigen::MatrixXd H;  // hosts x k
    Eigen::MatrixXd W;  // k x processes
    std::vector<double> error_trace;  // objective after each iteration
    double initial_error = 0.0;
    int iterations_used = 0;

    double final_error() const { return error_trace.empty() ? initial_error : error_trace.back(); }
};

struct NmfOptions {
    int k = 2;
    int max_iterations = 200;
    double tolerance = 1e-4;
    std::uint64_t seed = 0;
    const FactorizationResult* warm_start = nullptr;
};

inline constexpr double kNmfEpsilon = 1e-12;

/// ||M - H W||_F^2.
inline double reconstruction_error(const Eigen::MatrixXd& M, const Eigen::MatrixXd& H,
                                   const Eigen::MatrixXd& W) {
    if (H.rows() != M.rows() || W.cols() != M.cols() || H.cols() != W.rows()) {
        throw DimensionError("reconstruction_error: M is " + std::to_string(M.rows()) + "x" +
                             std::to_string(M.cols()) + ", H is " + std::to_string(H.rows()) + "x" +
                             std::to_string(H.cols()) + ", W is " + std::to_string(W.rows()) + "x" +
                             std::to_string(W.cols()));
    }
    return (M - H * W).squaredNorm();
}

namespace detail {

inline Eigen::MatrixXd random_factor(Eigen::Index rows, Eigen::Index cols, double scale, std::mt19937_64& rng) {
    // (0, 1]: 1 - U[0,1)
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = scale * (1.0 - unit(rng));
    }
    return out;
}

}  // namespace detail

inline FactorizationResult factorize(const Eigen::MatrixXd& M, const NmfOptions& opts) {
    if (M.rows() == 0 || M.cols() == 0) throw DimensionError("factorize: empty matrix");
    if (opts.k < 1) throw InvalidArgument("factorize: k must be >= 1");
    if (opts.max_iterations < 1) throw InvalidArgument("factorize: max_iterations must be >= 1");
    if (opts.k > std::min(M.rows(), M.cols())) {
        throw DimensionError("factorize: k=" + std::to_string(opts.k) + " exceeds min(" +
                             std::to_string(M.rows()) + ", " + std::to_string(M.cols()) + ")");
    }
    if ((M.array() < 0.0).any()) throw InvalidArgument("factorize: matrix has negative entries");

    const Eigen::Index k = opts.k;
    std::mt19937_64 rng(opts.seed);
    const double scale = std::sqrt(std::max(M.mean(), 0.0) / static_cast<double>(k));
    const double init_scale = scale > 0.0 ? scale : 1.0;

    FactorizationResult res;
    const auto* warm = opts.warm_start;
    const bool warm_h = warm && warm->H.rows() == M.rows() && warm->H.cols() == k;
    const bool warm_w = warm && warm->W.rows() == k && warm->W.cols() == M.cols();
    res.H = warm_h ? warm->H : detail::random_factor(M.rows(), k, init_scale, rng);
    res.W = warm_w ? warm->W : detail::random_factor(k, M.cols(), init_scale, rng);
    // A zero entry is a fixed point of the multiplicative rule; keep warm
    // factors strictly positive so every entry can still move.
    if (warm_h) res.H = res.H.cwiseMax(kNmfEpsilon);
    if (warm_w) res.W = res.W.cwiseMax(kNmfEpsilon);

    res.initial_error = reconstruction_error(M, res.H, res.W);
    const double denom_ref = std::max(res.initial_error, kNmfEpsilon);
    double previous = res.initial_error;

    for (int it = 0; it < opts.max_iterations; ++it) {
        // W first so a warm-started H is not discarded against a random W.
        const Eigen::MatrixXd HtH = res.H.transpose() * res.H;
        res.W.array() *= (res.H.transpose() * M).array() / ((HtH * res.W).array() + kNmfEpsilon);

        const Eigen::MatrixXd WWt = res.W * res.W.transpose();
        res.H.array() *= (M * res.W.transpose()).array() / ((res.H * WWt).array() + kNmfEpsilon);

        const double err = reconstruction_error(M, res.H, res.W);
        res.error_trace.push_back(err);
        ++res.iterations_used;
        if (std::abs(err - previous) / denom_ref < opts.tolerance) break;
        previous = err;
    }
    return res;
}

inline FactorizationResult factorize(const HostProcessMatrix& M, const NmfOptions& opts) {
    if (M.empty()) throw DimensionError("factorize: empty host-process matrix");
    return factorize(M.to_dense(), opts);
}

/// Index of the largest feature of each row; ties go to the lowest column.
inline std::vector<int> latent_labels(const Eigen::MatrixXd& H) {
    std::vector<int> labels(static_cast<std::size_t>(H.rows()), 0);
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < H.cols(); ++j) {
            if (H(i, j) > H(i, best)) best = j;
        }
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return labels;
}

}  // namespace dendrift
