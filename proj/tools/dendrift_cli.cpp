// dendrift: command-line front end.
//
//   dendrift generate  --drift-type abrupt --md 0.6 --out stream.csv
//   dendrift profile   --events log.csv --out reports.csv --snapshot clusters.csv
//   dendrift eval      --stream stream.csv --out timeline.csv --plot timeline.svg
//   dendrift nmf-bench --rows 200 --cols 500 --k 2,5,10,20,30

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dendrift/dendrift.hpp"

namespace {

using namespace dendrift;

struct PipelineFlags {
    PipelineConfig cfg;
    double offline_eps = 0.0;
    double offline_min_weight = 0.0;
    bool no_prune = false;
    bool no_warm_start = false;
    std::string roster_file;

    void add_to(CLI::App& app) {
        app.add_option("--nf", cfg.features, "Number of host latent features");
        app.add_option("--thc", cfg.change_threshold, "Page-Hinkley alarm threshold");
        app.add_option("--thd", cfg.drift_threshold, "Minimum changed hosts (count, or fraction of hosts if < 1)");
        app.add_option("--delta", cfg.pht_delta, "Page-Hinkley minimal change magnitude");
        app.add_option("--lambda-decay", cfg.denstream.decay_rate, "DenStream decay rate");
        app.add_option("--epsilon", cfg.denstream.epsilon, "Maximum micro-cluster radius");
        app.add_option("--beta", cfg.denstream.beta, "Potential micro-cluster weight factor");
        app.add_option("--mu", cfg.denstream.mu, "Core weight");
        app.add_option("--offline-eps", offline_eps, "Offline DBSCAN radius (default 2*epsilon)");
        app.add_option("--offline-min-weight", offline_min_weight, "Offline DBSCAN core weight (default mu)");
        app.add_flag("--no-prune", no_prune, "Disable periodic micro-cluster pruning");
        app.add_option("--nmf-iters", cfg.nmf_max_iterations, "NMF maximum iterations");
        app.add_option("--nmf-tol", cfg.nmf_tolerance, "NMF relative error-change tolerance");
        app.add_option("--nmf-seed", cfg.nmf_seed, "NMF initialization seed");
        app.add_flag("--no-warm-start", no_warm_start, "Factorize each interval from a fresh initialization");
        app.add_option("--roster", roster_file, "File with one host id per line (event logs)");
    }

    PipelineConfig resolve() const {
        PipelineConfig out = cfg;
        if (offline_eps > 0.0) out.denstream.offline_eps = offline_eps;
        if (offline_min_weight > 0.0) out.denstream.offline_min_weight = offline_min_weight;
        out.pruning = !no_prune;
        out.nmf_warm_start = !no_warm_start;
        if (!roster_file.empty()) {
            std::ifstream in(roster_file);
            if (!in) throw IoError("cannot open roster '" + roster_file + "'");
            std::string line;
            while (std::getline(in, line)) {
                const auto id = std::string(detail::trim(line));
                if (!id.empty() && id.front() != '#') out.roster.push_back(id);
            }
        }
        out.validate();
        return out;
    }
};

struct SpecFlags {
    StreamSpec spec;
    std::string drift_type = "abrupt";

    void add_to(CLI::App& app) {
        app.add_option("--drift-type", drift_type, "abrupt | gradual | incremental")
            ->check(CLI::IsMember({"abrupt", "gradual", "incremental"}));
        app.add_option("--dd", spec.drift_duration, "Drift duration in instances");
        app.add_option("--md", spec.drift_magnitude, "Drift magnitude (Jensen-Shannon distance)");
        app.add_option("--pd", spec.drift_precision, "Accepted deviation from the magnitude");
        app.add_option("--cb", spec.clusters_before, "Clusters before drift");
        app.add_option("--ca", spec.clusters_after, "Clusters after drift");
        app.add_option("--nf", spec.latent_features, "Latent features per host");
        app.add_option("--si", spec.instance_size, "Host latent vectors per instance");
        app.add_option("--nb", spec.instances_before, "Instances before drift");
        app.add_option("--total", spec.total_instances, "Total instances");
        app.add_option("--seed", spec.seed, "Random seed");
        app.add_option("--max-attempts", spec.max_attempts, "Model-pair rejection budget");
        app.add_option("--js-samples", spec.js_samples, "Monte-Carlo samples per JS estimate");
        app.add_option("--mean-low", spec.ranges.mean_low, "Lower bound of component means");
        app.add_option("--mean-high", spec.ranges.mean_high, "Upper bound of component means");
        app.add_option("--sigma-low", spec.ranges.sigma_low, "Lower bound of component sigma");
        app.add_option("--sigma-high", spec.ranges.sigma_high, "Upper bound of component sigma");
    }

    StreamSpec resolve() const {
        StreamSpec out = spec;
        out.drift_type = parse_drift_type(drift_type);
        out.validate();
        return out;
    }
};

/// Fills options that were not given on the command line from a key=value
/// file. Keys are long option names without the leading dashes.
void apply_config_file(CLI::App& app, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    for (const auto& [key, value] : read_key_values(in)) {
        auto* opt = app.get_option_no_throw("--" + key);
        if (!opt) throw InvalidArgument("config '" + path + "': unknown key '" + key + "' for '" + app.get_name() + "'");
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    return out;
}

Eigen::MatrixXd read_dense_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matrix '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        std::vector<double> row;
        for (auto field : detail::split_csv(body)) row.push_back(detail::parse_real(field, line_no));
        if (!rows.empty() && row.size() != rows.front().size()) throw ParseError(line_no, "ragged matrix row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(line_no, "empty matrix");
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return M;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drift-aware stream clustering for host profiling"};
    app.require_subcommand(1);
    std::string config_path;

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic drifted latent stream and its manifest");
    SpecFlags gen_flags;
    gen_flags.add_to(*gen);
    std::string gen_out = "stream.csv", gen_manifest;
    gen->add_option("--out,-o", gen_out, "Stream CSV path");
    gen->add_option("--manifest", gen_manifest, "Manifest path (default <out>.manifest)");
    gen->add_option("--config", config_path, "key=value config file; flags take precedence");

    // profile
    auto* prof = app.add_subcommand("profile", "Cluster hosts interval by interval with drift handling");
    PipelineFlags prof_flags;
    prof_flags.add_to(*prof);
    std::string prof_events, prof_stream, prof_out = "reports.csv", prof_snapshot, prof_assign, prof_timeline;
    bool prof_timings = false;
    auto* ev_opt = prof->add_option("--events", prof_events, "Event log (host,process,date,count)");
    auto* st_opt = prof->add_option("--stream", prof_stream, "Latent stream CSV");
    ev_opt->excludes(st_opt);
    prof->add_option("--out,-o", prof_out, "Interval report CSV");
    prof->add_option("--snapshot", prof_snapshot, "Final cluster snapshot CSV");
    prof->add_option("--assignments", prof_assign, "Per-host cluster assignments CSV");
    prof->add_option("--timeline", prof_timeline, "Drift timeline CSV");
    prof->add_flag("--timings", prof_timings, "Add per-stage timings to the report");
    prof->add_option("--config", config_path, "key=value config file; flags take precedence");

    // eval
    auto* eval = app.add_subcommand("eval", "Compare drift-aware clustering against plain DenStream");
    PipelineFlags eval_flags;
    eval_flags.add_to(*eval);
    std::string eval_stream, eval_out = "timeline.csv", eval_plot;
    bool eval_no_baseline = false;
    eval->add_option("--stream", eval_stream, "Labeled latent stream CSV")->required();
    eval->add_option("--out,-o", eval_out, "Timeline CSV");
    eval->add_option("--plot", eval_plot, "SVG chart of changed hosts and accuracy");
    eval->add_flag("--no-baseline", eval_no_baseline, "Skip the plain DenStream pass");
    eval->add_option("--config", config_path, "key=value config file; flags take precedence");

    // nmf-bench
    auto* bench = app.add_subcommand("nmf-bench", "Reconstruction error and runtime across latent dimensions");
    std::string bench_matrix, bench_out;
    int bench_rows = 200, bench_cols = 500, bench_iters = 200;
    double bench_tol = 0.0;
    std::uint64_t bench_seed = 7;
    std::vector<int> bench_k{2, 5, 10, 20, 30};
    bench->add_option("--matrix", bench_matrix, "Dense CSV matrix (default: seeded random matrix)");
    bench->add_option("--rows", bench_rows, "Rows of the random matrix");
    bench->add_option("--cols", bench_cols, "Columns of the random matrix");
    bench->add_option("--seed", bench_seed, "Seed for the random matrix and the initialization");
    bench->add_option("--k", bench_k, "Latent dimensions")->delimiter(',');
    bench->add_option("--iters", bench_iters, "Maximum iterations");
    bench->add_option("--tol", bench_tol, "Relative error-change tolerance (0 runs all iterations)");
    bench->add_option("--out,-o", bench_out, "CSV output (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (gen->parsed()) {
            if (!config_path.empty()) apply_config_file(*gen, config_path);
            const auto spec = gen_flags.resolve();
            const auto manifest = gen_manifest.empty() ? gen_out + ".manifest" : gen_manifest;
            const auto gs = generate_stream(spec, gen_out, manifest);
            std::cerr << "wrote " << gs.instances.size() << " instances to " << gen_out << " (JS distance "
                      << format_fixed(gs.models.distance, 4) << " after " << gs.models.attempts << " attempts)\n";
        } else if (prof->parsed()) {
            if (!config_path.empty()) apply_config_file(*prof, config_path);
            if (prof_events.empty() == prof_stream.empty()) throw InvalidArgument("profile needs --events or --stream");
            Pipeline pipeline(prof_flags.resolve());
            std::vector<IntervalReport> reports;
            std::vector<std::string> host_names;
            if (!prof_events.empty()) {
                const auto events = ingest_event_log(prof_events);
                reports = profile_event_log(pipeline, events);
                host_names = pipeline.config().roster;
            } else {
                const auto stream = read_latent_stream(prof_stream);
                reports = profile_latent_stream(pipeline, stream);
                if (!stream.empty())
                    for (std::size_t i = 0; i < stream.front().size(); ++i) host_names.push_back(stream.front().host_name(i));
            }
            for (const auto& r : reports)
                for (const auto& w : r.warnings) std::cerr << "interval " << r.interval << ": " << w << '\n';
            auto out = open_out(prof_out);
            write_reports_csv(out, reports, prof_timings);
            if (!prof_snapshot.empty()) {
                auto snap = open_out(prof_snapshot);
                write_cluster_snapshot(snap, pipeline.final_clusters());
            }
            if (!prof_timeline.empty()) {
                auto tl = open_out(prof_timeline);
                write_drift_timeline(tl, drift_timeline(reports));
            }
            if (!prof_assign.empty()) {
                auto as = open_out(prof_assign);
                as << "interval,host,cluster_id\n";
                for (const auto& r : reports)
                    for (std::size_t i = 0; i < r.assignments.size(); ++i)
                        as << r.interval << ',' << (i < host_names.size() ? host_names[i] : std::to_string(i)) << ','
                           << r.assignments[i] << '\n';
            }
        } else if (eval->parsed()) {
            if (!config_path.empty()) apply_config_file(*eval, config_path);
            const auto stream = read_latent_stream(eval_stream);
            const auto rows = run_experiment(eval_flags.resolve(), stream, !eval_no_baseline);
            auto out = open_out(eval_out);
            write_timeline_csv(out, rows);
            if (!eval_plot.empty()) {
                auto svg = open_out(eval_plot);
                write_timeline_svg(svg, rows);
            }
        } else if (bench->parsed()) {
            Eigen::MatrixXd M;
            if (!bench_matrix.empty()) {
                M = read_dense_csv(bench_matrix);
            } else {
                std::mt19937_64 rng(bench_seed);
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                M.resize(bench_rows, bench_cols);
                for (Eigen::Index j = 0; j < M.cols(); ++j)
                    for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = unit(rng);
            }
            std::ofstream file;
            if (!bench_out.empty()) file = open_out(bench_out);
            std::ostream& out = bench_out.empty() ? std::cout : file;
            out << "k,final_error,relative_error,iterations,runtime_ms\n";
            const double norm = M.squaredNorm();
            for (const int k : bench_k) {
                NmfOptions opts;
                opts.k = k;
                opts.max_iterations = bench_iters;
                opts.tolerance = bench_tol;
                opts.seed = bench_seed;
                const auto start = std::chrono::steady_clock::now();
                const auto res = factorize(M, opts);
                const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                out << k << ',' << format_fixed(res.final_error()) << ',' << format_fixed(res.final_error() / norm, 8) << ','
                    << res.iterations_used << ',' << format_fixed(ms, 3) << '\n';
            }
        }
    } catch (const dendrift::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
