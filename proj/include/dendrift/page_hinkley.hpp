#pragma once

// Page-Hinkley change detection over host latent features and the two-mode
// (normal / change) state machine that tells concept drifts from outliers.

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dendrift/errors.hpp"

namespace dendrift {

/// Two-sided, mean-centered Page-Hinkley test on a scalar stream.
///
/// Increase side:  U_n = sum (x_i - mean_i - delta/2), alarm if U_n - min U >= threshold.
/// Decrease side:  L_n = sum (x_i - mean_i + delta/2), alarm if max L - L_n >= threshold.
///
/// The detector clears its statistics right after alarming.
class PhtDetector {
public:
    PhtDetector() = default;
    PhtDetector(double delta, double threshold) : delta_(delta), threshold_(threshold) {}

    bool update(double x) {
        if (!std::isfinite(x)) throw InvalidArgument("PhtDetector: non-finite sample");
        ++n_;
        mean_ += (x - mean_) / static_cast<double>(n_);
        cum_pos_ += x - mean_ - delta_ / 2.0;
        min_cum_pos_ = std::min(min_cum_pos_, cum_pos_);
        cum_neg_ += x - mean_ + delta_ / 2.0;
        max_cum_neg_ = std::max(max_cum_neg_, cum_neg_);
        const bool alarm = cum_pos_ - min_cum_pos_ >= threshold_ || max_cum_neg_ - cum_neg_ >= threshold_;
        if (alarm) reset();
        return alarm;
    }

    void reset() noexcept {
        n_ = 0;
        mean_ = cum_pos_ = min_cum_pos_ = cum_neg_ = max_cum_neg_ = 0.0;
    }

    std::int64_t count() const noexcept { return n_; }
    double running_mean() const noexcept { return mean_; }
    double cum_pos() const noexcept { return cum_pos_; }
    double min_cum_pos() const noexcept { return min_cum_pos_; }
    double cum_neg() const noexcept { return cum_neg_; }
    double max_cum_neg() const noexcept { return max_cum_neg_; }
    double delta() const noexcept { return delta_; }
    double threshold() const noexcept { return threshold_; }

private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double cum_pos_ = 0.0;
    double min_cum_pos_ = 0.0;
    double cum_neg_ = 0.0;
    double max_cum_neg_ = 0.0;
    double delta_ = 0.005;
    double threshold_ = 50.0;
};

/// One detector per (host, feature).
class DetectorBank {
public:
    DetectorBank() = default;
    DetectorBank(std::size_t hosts, std::size_t features, double delta, double threshold)
        : hosts_(hosts), features_(features), cells_(hosts * features, PhtDetector(delta, threshold)) {}

    std::size_t hosts() const noexcept { return hosts_; }
    std::size_t features() const noexcept { return features_; }

    const PhtDetector& at(std::size_t host, std::size_t feature) const { return cells_.at(host * features_ + feature); }
    PhtDetector& at(std::size_t host, std::size_t feature) { return cells_.at(host * features_ + feature); }

    /// Feeds row i of `H` to host i's detectors. Returns the number of hosts
    /// with at least one alarming feature.
    std::size_t count_changed_hosts(const Eigen::MatrixXd& H) {
        check_shape(H);
        std::size_t changed = 0;
        for (std::size_t i = 0; i < hosts_; ++i) {
            bool host_changed = false;
            for (std::size_t j = 0; j < features_; ++j) {
                // every feature is fed, even after the host is already counted
                host_changed |= at(i, j).update(H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            }
            changed += host_changed ? 1 : 0;
        }
        return changed;
    }

    void reset() noexcept {
        for (auto& d : cells_) d.reset();
    }

    /// Samples seen by the busiest detector.
    std::int64_t max_count() const noexcept {
        std::int64_t m = 0;
        for (const auto& d : cells_) m = std::max(m, d.count());
        return m;
    }

    std::int64_t total_count() const noexcept {
        std::int64_t s = 0;
        for (const auto& d : cells_) s += d.count();
        return s;
    }

private:
    void check_shape(const Eigen::MatrixXd& H) const {
        if (static_cast<std::size_t>(H.rows()) != hosts_ || static_cast<std::size_t>(H.cols()) != features_) {
            throw DimensionError("DetectorBank: got " + std::to_string(H.rows()) + "x" + std::to_string(H.cols()) +
                                 " latent matrix, bank is " + std::to_string(hosts_) + "x" +
                                 std::to_string(features_));
        }
    }

    std::size_t hosts_ = 0;
    std::size_t features_ = 0;
    std::vector<PhtDetector> cells_;
};

enum class DriftMode { Normal, Change };

enum class DriftDecision { StayNormal, EnterChange, OutlierConfirmed, DriftConfirmed };

inline std::string_view to_string(DriftMode m) { return m == DriftMode::Normal ? "normal" : "change"; }

inline std::string_view to_string(DriftDecision d) {
    switch (d) {
        case DriftDecision::StayNormal: return "stay-normal";
        case DriftDecision::EnterChange: return "enter-change";
        case DriftDecision::OutlierConfirmed: return "outlier-confirmed";
        case DriftDecision::DriftConfirmed: return "drift-confirmed";
    }
    return "?";
}

struct DriftSettings {
    double delta = 0.005;             // minimal magnitude of change
    double change_threshold = 50.0;   // per-detector alarm threshold (Th_c)
    std::size_t drift_threshold = 50; // minimum changed hosts (Th_d)
};

/// Converts a drift threshold given either as an absolute host count (>= 1)
/// or as a fraction of the roster (< 1) into a host count.
inline std::size_t resolve_drift_threshold(double value, std::size_t roster_size) {
    if (!(value > 0.0)) throw InvalidArgument("drift threshold must be positive");
    if (value < 1.0) {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(value * static_cast<double>(roster_size))));
    }
    return static_cast<std::size_t>(std::llround(value));
}

struct StepResult {
    DriftDecision decision = DriftDecision::StayNormal;
    std::size_t changed_hosts = 0;  // C as reported by the algorithm
    std::size_t primary_changed = 0;
    std::size_t spare_changed = 0;  // only counted when leaving change mode
};

class DriftState {
public:
    DriftState(std::size_t hosts, std::size_t features, DriftSettings settings)
        : settings_(settings),
          primary_(hosts, features, settings.delta, settings.change_threshold),
          spare_(hosts, features, settings.delta, settings.change_threshold) {
        if (settings.drift_threshold < 1) throw InvalidArgument("drift threshold must be >= 1");
    }

    DriftMode mode() const noexcept { return mode_; }
    const DriftSettings& settings() const noexcept { return settings_; }
    const DetectorBank& primary() const noexcept { return primary_; }
    const DetectorBank& spare() const noexcept { return spare_; }
    std::size_t hosts() const noexcept { return primary_.hosts(); }
    std::size_t features() const noexcept { return primary_.features(); }

    /// One interval of the detection loop. On DriftConfirmed the caller owns
    /// resetting the clustering model; the banks are reset here.
    StepResult step(const Eigen::MatrixXd& H) {
        StepResult r;
        const auto th_d = settings_.drift_threshold;
        r.primary_changed = primary_.count_changed_hosts(H);
        r.changed_hosts = r.primary_changed;

        if (mode_ == DriftMode::Normal) {
            if (r.changed_hosts >= th_d) {
                mode_ = DriftMode::Change;
                r.decision = DriftDecision::EnterChange;
            } else {
                spare_.count_changed_hosts(H);
                r.decision = DriftDecision::StayNormal;
            }
            return r;
        }

        if (r.changed_hosts >= th_d) {
            r.decision = DriftDecision::EnterChange;
            return r;
        }
        mode_ = DriftMode::Normal;
        r.spare_changed = spare_.count_changed_hosts(H);
        r.changed_hosts += r.spare_changed;
        if (r.changed_hosts >= th_d) {
            r.decision = DriftDecision::DriftConfirmed;
            reset_banks();
        } else {
            r.decision = DriftDecision::OutlierConfirmed;
        }
        return r;
    }

    void reset_banks() noexcept {
        primary_.reset();
        spare_.reset();
        mode_ = DriftMode::Normal;
    }

private:
    DriftSettings settings_;
    DriftMode mode_ = DriftMode::Normal;
    DetectorBank primary_;
    DetectorBank spare_;
};

struct DriftTimelineRow {
    std::int64_t interval;
    DriftMode mode;
    std::size_t changed_hosts;
    DriftDecision decision;
};

/// CSV "interval,mode,changed_hosts,decision".
inline void write_drift_timeline(std::ostream& out, const std::vector<DriftTimelineRow>& rows) {
    out << "interval,mode,changed_hosts,decision\n";
    for (const auto& r : rows) {
        out << r.interval << ',' << to_string(r.mode) << ',' << r.changed_hosts << ',' << to_string(r.decision) << '\n';
    }
}

}  // namespace dendrift
