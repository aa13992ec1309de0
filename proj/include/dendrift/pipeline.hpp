#pragma once

// Drift-aware host profiling loop: latent vectors per interval, drift state
// machine, DenStream maintenance, offline clustering and evaluation.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dendrift/denstream.hpp"
#include "dendrift/errors.hpp"
#include "dendrift/event_ingest.hpp"
#include "dendrift/factorization.hpp"
#include "dendrift/latent_io.hpp"
#include "dendrift/page_hinkley.hpp"

namespace dendrift {

struct PipelineConfig {
    int features = 2;                 // N_f
    double change_threshold = 50.0;   // Th_c
    double drift_threshold = 50.0;    // Th_d, absolute count or fraction of the roster when < 1
    double pht_delta = 0.005;
    DenStreamParams denstream;

    int nmf_max_iterations = 200;
    double nmf_tolerance = 1e-4;
    std::uint64_t nmf_seed = 0;
    bool nmf_warm_start = true;

    std::vector<std::string> roster;  // event logs only; empty = hosts of the first interval
    bool pruning = true;
    bool reset_on_drift = true;       // false gives plain DenStream
    bool cluster_every_interval = true;

    void validate() const {
        if (features < 1) throw InvalidArgument("N_f must be >= 1");
        if (!(drift_threshold > 0.0)) throw InvalidArgument("Th_d must be positive");
        if (!(change_threshold > 0.0)) throw InvalidArgument("Th_c must be positive");
        if (pht_delta < 0.0) throw InvalidArgument("PHT delta must be >= 0");
        denstream.validate();
    }
};

struct StageTimings {
    double nmf_ms = 0.0;
    double detect_ms = 0.0;
    double cluster_ms = 0.0;
};

struct IntervalReport {
    std::int64_t interval = 0;
    DriftMode mode = DriftMode::Normal;
    std::size_t changed_hosts = 0;
    DriftDecision decision = DriftDecision::StayNormal;
    bool reset = false;
    std::vector<int> assignments;  // per host row, kNoise when unassigned; empty if not clustered
    int cluster_count = 0;
    std::optional<double> accuracy;
    std::optional<double> nmf_error;
    StageTimings timings;
    std::vector<std::string> warnings;
};

/// Maps each non-noise cluster to its majority true label and returns the
/// fraction of hosts whose mapped label matches; noise is always wrong.
inline double accuracy(std::span<const int> assignments, std::span<const int> truth) {
    if (assignments.empty()) throw InvalidArgument("accuracy: empty host set");
    if (assignments.size() != truth.size()) throw DimensionError("accuracy: assignment/truth size mismatch");
    std::map<int, std::map<int, std::size_t>> votes;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != kNoise) ++votes[assignments[i]][truth[i]];
    }
    std::size_t correct = 0;
    for (const auto& [cluster, tally] : votes) {
        std::size_t best = 0;
        for (const auto& [label, n] : tally) best = std::max(best, n);  // ties: any, the count is what matters
        correct += best;
    }
    return static_cast<double>(correct) / static_cast<double>(assignments.size());
}

class Pipeline {
public:
    explicit Pipeline(PipelineConfig config) : config_(std::move(config)), model_(config_.denstream) {
        config_.validate();
    }

    const PipelineConfig& config() const noexcept { return config_; }
    const ClusterModel& model() const noexcept { return model_; }
    const std::optional<DriftState>& drift() const noexcept { return drift_; }
    int resets() const noexcept { return resets_; }
    std::optional<std::int64_t> last_interval() const noexcept { return last_t_; }

    /// One interval from a latent matrix (rows = hosts, cols = N_f features).
    IntervalReport process(std::int64_t t, const Eigen::MatrixXd& H, std::span<const int> truth = {}) {
        if (last_t_ && t <= *last_t_) {
            throw TimeOrderError("Pipeline: interval " + std::to_string(t) + " does not follow " +
                                 std::to_string(*last_t_));
        }
        if (static_cast<int>(H.cols()) != config_.features) {
            throw DimensionError("Pipeline: latent matrix has " + std::to_string(H.cols()) + " features, N_f is " +
                                 std::to_string(config_.features));
        }
        if (!drift_) {
            DriftSettings ds;
            ds.delta = config_.pht_delta;
            ds.change_threshold = config_.change_threshold;
            ds.drift_threshold = resolve_drift_threshold(config_.drift_threshold, static_cast<std::size_t>(H.rows()));
            drift_.emplace(static_cast<std::size_t>(H.rows()), static_cast<std::size_t>(H.cols()), ds);
        } else if (static_cast<std::size_t>(H.rows()) != drift_->hosts()) {
            throw DimensionError("Pipeline: host count changed from " + std::to_string(drift_->hosts()) + " to " +
                                 std::to_string(H.rows()));
        }
        if (!truth.empty() && truth.size() != static_cast<std::size_t>(H.rows())) {
            throw DimensionError("Pipeline: label count does not match host count");
        }
        last_t_ = t;

        IntervalReport rep;
        rep.interval = t;

        auto t0 = Clock::now();
        const auto step = drift_->step(H);
        rep.decision = step.decision;
        rep.changed_hosts = step.changed_hosts;
        rep.mode = drift_->mode();
        rep.timings.detect_ms = elapsed_ms(t0);

        t0 = Clock::now();
        if (step.decision == DriftDecision::DriftConfirmed && config_.reset_on_drift) {
            model_.reset();
            rep.reset = true;
            ++resets_;
        }
        model_.merge(H, t);
        if (config_.pruning && t % model_.pruning_period() == 0) model_.prune(t);
        if (config_.cluster_every_interval) {
            const auto fc = model_.offline_cluster();
            rep.cluster_count = fc.cluster_count;
            rep.assignments = assign_hosts(fc, H);
            if (!truth.empty()) rep.accuracy = accuracy(rep.assignments, truth);
        }
        rep.timings.cluster_ms = elapsed_ms(t0);
        return rep;
    }

    /// On-demand final clusters.
    FinalClusters final_clusters() const { return model_.offline_cluster(); }

    std::vector<int> assign_hosts(const FinalClusters& fc, const Eigen::MatrixXd& H) const {
        std::vector<int> out(static_cast<std::size_t>(H.rows()));
        const double radius = model_.params().dbscan_eps();
        for (Eigen::Index i = 0; i < H.rows(); ++i) out[static_cast<std::size_t>(i)] = fc.assign(H.row(i).transpose(), radius);
        return out;
    }

    /// One interval from an event log: host-process matrix, NMF, then the
    /// latent path. Labels are the argmax latent feature of each host.
    IntervalReport process_events(std::span<const EventRecord> events, std::int64_t t) {
        std::vector<std::string> unseen;
        if (config_.roster.empty()) config_.roster = hosts_in_interval(events, t);
        const auto M = build_matrix(events, t, config_.roster, &unseen);
        if (M.cols() < static_cast<std::size_t>(config_.features) || M.rows() < static_cast<std::size_t>(config_.features)) {
            throw DimensionError("interval " + std::to_string(t) + ": " + std::to_string(M.rows()) + "x" +
                                 std::to_string(M.cols()) + " matrix cannot be factorized with N_f=" +
                                 std::to_string(config_.features));
        }
        auto t0 = Clock::now();
        NmfOptions opts;
        opts.k = config_.features;
        opts.max_iterations = config_.nmf_max_iterations;
        opts.tolerance = config_.nmf_tolerance;
        opts.seed = config_.nmf_seed;
        if (config_.nmf_warm_start && last_nmf_) opts.warm_start = &*last_nmf_;
        auto nmf = factorize(M, opts);
        const double nmf_ms = elapsed_ms(t0);

        auto rep = process(t, nmf.H, latent_labels(nmf.H));
        rep.nmf_error = nmf.final_error();
        rep.timings.nmf_ms = nmf_ms;
        for (const auto& h : unseen) rep.warnings.push_back("host '" + h + "' not in roster; ignored");
        last_nmf_ = std::move(nmf);
        return rep;
    }

private:
    using Clock = std::chrono::steady_clock;
    static double elapsed_ms(Clock::time_point since) {
        return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
    }

    PipelineConfig config_;
    ClusterModel model_;
    std::optional<DriftState> drift_;
    std::optional<FactorizationResult> last_nmf_;
    std::optional<std::int64_t> last_t_;
    int resets_ = 0;
};

/// Runs every interval of an event log that has events, in date order.
inline std::vector<IntervalReport> profile_event_log(Pipeline& pipeline, std::span<const EventRecord> events) {
    std::vector<IntervalReport> reports;
    for (const auto t : intervals_of(events)) reports.push_back(pipeline.process_events(events, t));
    return reports;
}

inline std::vector<IntervalReport> profile_latent_stream(Pipeline& pipeline, std::span<const LatentInstance> stream) {
    std::vector<IntervalReport> reports;
    for (const auto& inst : stream) reports.push_back(pipeline.process(inst.index, inst.rows, inst.labels));
    return reports;
}

struct TimelineRow {
    std::int64_t interval = 0;
    std::size_t changed_hosts = 0;
    DriftMode mode = DriftMode::Normal;
    DriftDecision decision = DriftDecision::StayNormal;
    std::optional<double> accuracy_dendrift;
    std::optional<double> accuracy_baseline;
    std::optional<double> nmf_error;
    int clusters_dendrift = 0;
};

/// Runs the drift-aware pipeline over a labeled stream and, with
/// `with_baseline`, the same stream through plain DenStream (no resets).
inline std::vector<TimelineRow> run_experiment(const PipelineConfig& config, std::span<const LatentInstance> stream,
                                               bool with_baseline) {
    for (const auto& inst : stream) {
        if (!inst.labeled()) throw InvalidArgument("run_experiment: stream instance " + std::to_string(inst.index) +
                                                   " has no ground-truth labels");
        if (static_cast<int>(inst.features()) != config.features) {
            throw DimensionError("run_experiment: stream has " + std::to_string(inst.features()) +
                                 " features, config N_f is " + std::to_string(config.features));
        }
    }
    PipelineConfig main_cfg = config;
    main_cfg.reset_on_drift = true;
    main_cfg.cluster_every_interval = true;
    Pipeline main(main_cfg);
    std::optional<Pipeline> baseline;
    if (with_baseline) {
        PipelineConfig base_cfg = main_cfg;
        base_cfg.reset_on_drift = false;
        baseline.emplace(base_cfg);
    }

    std::vector<TimelineRow> rows;
    rows.reserve(stream.size());
    for (const auto& inst : stream) {
        const auto rep = main.process(inst.index, inst.rows, inst.labels);
        TimelineRow row;
        row.interval = rep.interval;
        row.changed_hosts = rep.changed_hosts;
        row.mode = rep.mode;
        row.decision = rep.decision;
        row.accuracy_dendrift = rep.accuracy;
        row.clusters_dendrift = rep.cluster_count;
        if (baseline) row.accuracy_baseline = baseline->process(inst.index, inst.rows, inst.labels).accuracy;
        rows.push_back(row);
    }
    return rows;
}

inline void write_timeline_csv(std::ostream& out, const std::vector<TimelineRow>& rows) {
    auto opt = [](const std::optional<double>& v) { return v ? format_fixed(*v) : std::string(); };
    out << "interval,changed_hosts,mode,decision,accuracy_dendrift,accuracy_baseline,nmf_error\n";
    for (const auto& r : rows) {
        out << r.interval << ',' << r.changed_hosts << ',' << to_string(r.mode) << ',' << to_string(r.decision) << ','
            << opt(r.accuracy_dendrift) << ',' << opt(r.accuracy_baseline) << ',' << opt(r.nmf_error) << '\n';
    }
}

/// Per-interval report CSV; timings only when requested since they vary run to run.
inline void write_reports_csv(std::ostream& out, const std::vector<IntervalReport>& reports, bool timings = false) {
    auto opt = [](const std::optional<double>& v) { return v ? format_fixed(*v) : std::string(); };
    out << "interval,changed_hosts,mode,decision,reset,clusters,accuracy,nmf_error";
    if (timings) out << ",nmf_ms,detect_ms,cluster_ms";
    out << '\n';
    for (const auto& r : reports) {
        out << r.interval << ',' << r.changed_hosts << ',' << to_string(r.mode) << ',' << to_string(r.decision) << ','
            << (r.reset ? 1 : 0) << ',' << r.cluster_count << ',' << opt(r.accuracy) << ',' << opt(r.nmf_error);
        if (timings) {
            out << ',' << format_fixed(r.timings.nmf_ms, 3) << ',' << format_fixed(r.timings.detect_ms, 3) << ','
                << format_fixed(r.timings.cluster_ms, 3);
        }
        out << '\n';
    }
}

inline std::vector<DriftTimelineRow> drift_timeline(const std::vector<IntervalReport>& reports) {
    std::vector<DriftTimelineRow> rows;
    for (const auto& r : reports) rows.push_back({r.interval, r.mode, r.changed_hosts, r.decision});
    return rows;
}

}  // namespace dendrift
