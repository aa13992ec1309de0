#pragma once

// Synthetic drifted latent streams. Each stable concept is a Gaussian
// mixture; the post-drift mixture is redrawn until its Jensen-Shannon
// distance to the pre-drift one lands in the requested band.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "dendrift/errors.hpp"
#include "dendrift/latent_io.hpp"

namespace dendrift {

class GaussianComponent {
public:
    GaussianComponent(Eigen::VectorXd mean, Eigen::MatrixXd covariance, double weight)
        : mean_(std::move(mean)), cov_(std::move(covariance)), weight_(weight) {
        if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
            throw DimensionError("GaussianComponent: covariance shape does not match mean");
        }
        if (!cov_.isApprox(cov_.transpose())) throw InvalidArgument("GaussianComponent: covariance not symmetric");
        Eigen::LLT<Eigen::MatrixXd> llt(cov_);
        if (llt.info() != Eigen::Success) throw InvalidArgument("GaussianComponent: covariance not positive-definite");
        chol_ = llt.matrixL();
        const double log_det = 2.0 * chol_.diagonal().array().log().sum();
        log_norm_ = -0.5 * (static_cast<double>(mean_.size()) * std::log(2.0 * std::numbers::pi) + log_det);
    }

    const Eigen::VectorXd& mean() const noexcept { return mean_; }
    const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
    double weight() const noexcept { return weight_; }
    Eigen::Index dim() const noexcept { return mean_.size(); }

    double log_pdf(const Eigen::VectorXd& x) const {
        const Eigen::VectorXd z = chol_.triangularView<Eigen::Lower>().solve(x - mean_);
        return log_norm_ - 0.5 * z.squaredNorm();
    }

    /// log_pdf of every column of xs.
    Eigen::ArrayXd log_pdf_cols(const Eigen::MatrixXd& xs) const {
        // column-oriented forward substitution, one sample per column
        Eigen::ArrayXXd z = (xs.colwise() - mean_).array();
        for (Eigen::Index j = 0; j < z.rows(); ++j) {
            z.row(j) /= chol_(j, j);
            for (Eigen::Index i = j + 1; i < z.rows(); ++i) z.row(i) -= chol_(i, j) * z.row(j);
        }
        Eigen::ArrayXd out(z.cols());
        for (Eigen::Index c = 0; c < z.cols(); ++c) out(c) = log_norm_ - 0.5 * z.col(c).matrix().squaredNorm();
        return out;
    }

    template <class Rng>
    Eigen::VectorXd sample(Rng& rng) const {
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd z(mean_.size());
        for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = normal(rng);
        return mean_ + chol_ * z;
    }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd chol_;
    double weight_;
    double log_norm_ = 0.0;
};

struct MixtureSample {
    Eigen::MatrixXd rows;
    std::vector<int> components;
};

class MixtureModel {
public:
    MixtureModel() = default;
    explicit MixtureModel(std::vector<GaussianComponent> components) : components_(std::move(components)) {
        if (components_.empty()) throw InvalidArgument("MixtureModel: no components");
        double total = 0.0;
        for (const auto& c : components_) {
            if (c.dim() != components_.front().dim()) throw DimensionError("MixtureModel: mixed dimensions");
            if (!(c.weight() > 0.0)) throw InvalidArgument("MixtureModel: weights must be positive");
            total += c.weight();
        }
        if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("MixtureModel: weights must sum to 1");
    }

    const std::vector<GaussianComponent>& components() const noexcept { return components_; }
    std::size_t size() const noexcept { return components_.size(); }
    Eigen::Index dim() const noexcept { return components_.empty() ? 0 : components_.front().dim(); }

    double log_pdf(const Eigen::VectorXd& x) const {
        // streaming log-sum-exp
        double best = -std::numeric_limits<double>::infinity();
        double acc = 0.0;
        for (const auto& c : components_) {
            const double term = std::log(c.weight()) + c.log_pdf(x);
            if (term > best) {
                acc = acc * std::exp(best - term) + 1.0;
                best = term;
            } else {
                acc += std::exp(term - best);
            }
        }
        return best + std::log(acc);
    }

    /// log_pdf of every column of xs.
    Eigen::ArrayXd log_pdf_cols(const Eigen::MatrixXd& xs) const {
        Eigen::ArrayXd best = Eigen::ArrayXd::Constant(xs.cols(), -std::numeric_limits<double>::infinity());
        Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(xs.cols());
        for (const auto& c : components_) {
            const Eigen::ArrayXd term = std::log(c.weight()) + c.log_pdf_cols(xs);
            for (Eigen::Index i = 0; i < term.size(); ++i) {
                if (term(i) > best(i)) {
                    acc(i) = acc(i) * std::exp(best(i) - term(i)) + 1.0;
                    best(i) = term(i);
                } else {
                    acc(i) += std::exp(term(i) - best(i));
                }
            }
        }
        for (Eigen::Index i = 0; i < acc.size(); ++i) best(i) += std::log(acc(i));
        return best;
    }

    /// Rows allotted to each component for an n-row draw: floor(n * w) plus
    /// one extra row for the largest remainders (ties to the lower index).
    std::vector<std::size_t> allocation(std::size_t n) const {
        std::vector<std::size_t> counts(components_.size());
        std::vector<std::pair<double, std::size_t>> remainders;
        std::size_t assigned = 0;
        for (std::size_t c = 0; c < components_.size(); ++c) {
            const double exact = static_cast<double>(n) * components_[c].weight();
            counts[c] = static_cast<std::size_t>(std::floor(exact + 1e-9));
            assigned += counts[c];
            remainders.emplace_back(exact - static_cast<double>(counts[c]), c);
        }
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++counts[remainders[r % remainders.size()].second];
        return counts;
    }

    /// Component of each row in an n-row draw: rows are grouped by component
    /// in component order, sized by allocation(n).
    std::vector<int> row_components(std::size_t n) const {
        std::vector<int> out;
        out.reserve(n);
        const auto counts = allocation(n);
        for (std::size_t c = 0; c < counts.size(); ++c) out.insert(out.end(), counts[c], static_cast<int>(c));
        return out;
    }

    /// Draws n rows grouped by component, so that row i keeps its source
    /// component across draws of the same size.
    template <class Rng>
    MixtureSample sample(std::size_t n, Rng& rng) const {
        MixtureSample out;
        out.components = row_components(n);
        out.rows.resize(static_cast<Eigen::Index>(n), dim());
        for (std::size_t i = 0; i < n; ++i) {
            out.rows.row(static_cast<Eigen::Index>(i)) =
                components_[static_cast<std::size_t>(out.components[i])].sample(rng).transpose();
        }
        return out;
    }

private:
    std::vector<GaussianComponent> components_;
};

struct MixtureRanges {
    double mean_low = 0.0;
    double mean_high = 10.0;
    double sigma_low = 0.3;
    double sigma_high = 1.0;
};

/// C equally weighted isotropic components: means uniform in the mean box,
/// covariance sigma^2 * I with sigma uniform in the sigma range.
template <class Rng>
MixtureModel gen_mix_model(int clusters, int features, Rng& rng, const MixtureRanges& ranges = {}) {
    if (clusters < 1) throw InvalidArgument("gen_mix_model: cluster count must be >= 1");
    if (features < 1) throw InvalidArgument("gen_mix_model: feature count must be >= 1");
    std::uniform_real_distribution<double> mean_dist(ranges.mean_low, ranges.mean_high);
    std::uniform_real_distribution<double> sigma_dist(ranges.sigma_low, ranges.sigma_high);
    std::vector<GaussianComponent> comps;
    for (int c = 0; c < clusters; ++c) {
        Eigen::VectorXd mean(features);
        for (int j = 0; j < features; ++j) mean(j) = mean_dist(rng);
        const double sigma = sigma_dist(rng);
        comps.emplace_back(std::move(mean), Eigen::MatrixXd::Identity(features, features) * (sigma * sigma),
                           1.0 / static_cast<double>(clusters));
    }
    return MixtureModel(std::move(comps));
}

/// Monte-Carlo Jensen-Shannon distance (base 2, so in [0, 1]): n/2 draws from
/// each model, densities under a, b and m = (a + b) / 2.
inline double js_distance(const MixtureModel& a, const MixtureModel& b, std::size_t n_samples, std::uint64_t seed) {
    if (a.dim() != b.dim()) throw DimensionError("js_distance: models differ in dimension");
    if (n_samples < 1) throw InvalidArgument("js_distance: n_samples must be >= 1");
    std::mt19937_64 rng(seed);
    const std::size_t half_a = std::max<std::size_t>(1, n_samples / 2);
    const std::size_t half_b = std::max<std::size_t>(1, n_samples - n_samples / 2);

    auto kl_to_mid = [](const MixtureModel& self, const MixtureModel& other, const Eigen::MatrixXd& xs) {
        const Eigen::MatrixXd cols = xs.transpose();
        const Eigen::ArrayXd self_lp = self.log_pdf_cols(cols);
        const Eigen::ArrayXd other_lp = other.log_pdf_cols(cols);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < xs.rows(); ++i) {
            const double ls = self_lp(i);
            const double lo = other_lp(i);
            const double hi = std::max(ls, lo);
            const double lm = hi + std::log(0.5 * (std::exp(ls - hi) + std::exp(lo - hi)));
            acc += (ls - lm) / std::numbers::ln2;
        }
        return acc / static_cast<double>(xs.rows());
    };

    const auto xa = a.sample(half_a, rng);
    const auto xb = b.sample(half_b, rng);
    const double jsd = 0.5 * kl_to_mid(a, b, xa.rows) + 0.5 * kl_to_mid(b, a, xb.rows);
    return std::sqrt(std::clamp(jsd, 0.0, 1.0));
}

enum class DriftType { Abrupt, Gradual, Incremental };

inline std::string_view to_string(DriftType t) {
    switch (t) {
        case DriftType::Abrupt: return "abrupt";
        case DriftType::Gradual: return "gradual";
        case DriftType::Incremental: return "incremental";
    }
    return "?";
}

inline DriftType parse_drift_type(std::string_view s) {
    if (s == "abrupt") return DriftType::Abrupt;
    if (s == "gradual") return DriftType::Gradual;
    if (s == "incremental") return DriftType::Incremental;
    throw InvalidArgument("unknown drift type '" + std::string(s) + "'");
}

struct StreamSpec {
    DriftType drift_type = DriftType::Abrupt;
    int drift_duration = 0;        // instances between the two stable concepts
    double drift_magnitude = 0.6;  // target JS distance
    double drift_precision = 0.05; // accepted deviation from the target
    int clusters_before = 2;
    int clusters_after = 2;
    int latent_features = 2;
    int instance_size = 200;       // host latent vectors per instance
    int instances_before = 50;
    int total_instances = 100;
    std::uint64_t seed = 1;

    MixtureRanges ranges;
    int max_attempts = 500;
    std::size_t js_samples = 100000;

    void validate() const {
        if (drift_type == DriftType::Abrupt && drift_duration != 0) {
            throw InvalidArgument("abrupt drift requires a drift duration of 0");
        }
        if (drift_type != DriftType::Abrupt && drift_duration < 1) {
            throw InvalidArgument("gradual/incremental drift requires a drift duration >= 1");
        }
        if (drift_magnitude < 0.0 || drift_magnitude > 1.0) throw InvalidArgument("drift magnitude must be in [0, 1]");
        if (drift_precision < 0.0) throw InvalidArgument("drift precision must be >= 0");
        if (drift_magnitude + drift_precision > 1.0) throw InvalidArgument("drift magnitude + precision must be <= 1");
        if (clusters_before < 1 || clusters_after < 1) throw InvalidArgument("cluster counts must be >= 1");
        if (latent_features < 1) throw InvalidArgument("latent feature count must be >= 1");
        if (instance_size < 1) throw InvalidArgument("instance size must be >= 1");
        if (instances_before < 1) throw InvalidArgument("instances before drift must be >= 1");
        if (total_instances < 1) throw InvalidArgument("total instances must be >= 1");
        if (max_attempts < 1) throw InvalidArgument("max attempts must be >= 1");
        if (js_samples < 1) throw InvalidArgument("JS sample count must be >= 1");
    }
};

struct ModelPair {
    MixtureModel pre;
    MixtureModel post;
    double distance = 0.0;
    int attempts = 0;
};

/// Draws the pre-drift model once, then redraws the post-drift model until
/// its JS distance is within drift_precision of drift_magnitude.
template <class Rng>
ModelPair gen_model_pair(const StreamSpec& spec, Rng& rng) {
    spec.validate();
    if (!(spec.drift_precision > 0.0)) throw InvalidArgument("gen_model_pair: drift precision must be > 0");
    ModelPair pair;
    pair.pre = gen_mix_model(spec.clusters_before, spec.latent_features, rng, spec.ranges);
    double closest = std::numeric_limits<double>::quiet_NaN();
    for (int attempt = 1; attempt <= spec.max_attempts; ++attempt) {
        auto post = gen_mix_model(spec.clusters_after, spec.latent_features, rng, spec.ranges);
        const std::uint64_t js_seed = rng();
        const double d = js_distance(pair.pre, post, spec.js_samples, js_seed);
        if (std::isnan(closest) || std::abs(d - spec.drift_magnitude) < std::abs(closest - spec.drift_magnitude)) {
            closest = d;
        }
        if (std::abs(d - spec.drift_magnitude) <= spec.drift_precision) {
            pair.post = std::move(post);
            pair.distance = d;
            pair.attempts = attempt;
            return pair;
        }
    }
    throw BudgetExhausted("gen_model_pair: no post-drift model within " + std::to_string(spec.drift_precision) +
                              " of magnitude " + std::to_string(spec.drift_magnitude) + " after " +
                              std::to_string(spec.max_attempts) + " attempts",
                          closest);
}

/// Sequential instance generator over an accepted model pair.
class StreamGenerator {
public:
    /// Draws the model pair from the spec's seed.
    explicit StreamGenerator(const StreamSpec& spec) : spec_(spec), rng_(spec.seed) {
        pair_ = gen_model_pair(spec_, rng_);
    }

    StreamGenerator(const StreamSpec& spec, ModelPair pair, std::uint64_t instance_seed)
        : spec_(spec), pair_(std::move(pair)), rng_(instance_seed) {
        spec_.validate();
    }

    const StreamSpec& spec() const noexcept { return spec_; }
    const ModelPair& models() const noexcept { return pair_; }
    std::int64_t emitted() const noexcept { return emitted_; }
    bool done() const noexcept { return emitted_ >= spec_.total_instances; }

    LatentInstance next_instance() {
        if (done()) throw InvalidArgument("StreamGenerator: all " + std::to_string(spec_.total_instances) +
                                          " instances already emitted");
        const std::int64_t s = emitted_++;
        const std::int64_t nb = spec_.instances_before;
        const std::int64_t dd = spec_.drift_duration;
        const auto size = static_cast<std::size_t>(spec_.instance_size);

        LatentInstance inst;
        inst.index = s;
        if (s < nb) {
            fill(inst, pair_.pre.sample(size, rng_), 0);
        } else if (s >= nb + dd) {
            fill(inst, pair_.post.sample(size, rng_), spec_.clusters_before);
        } else if (spec_.drift_type == DriftType::Gradual) {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double rnd = unit(rng_);
            if (rnd < static_cast<double>(s - nb) / static_cast<double>(dd)) {
                fill(inst, pair_.post.sample(size, rng_), spec_.clusters_before);
            } else {
                fill(inst, pair_.pre.sample(size, rng_), 0);
            }
        } else {
            // Each host keeps its pre- and post-drift component; a random
            // subset of round(weight * S_i) hosts draws from the post model.
            const double weight = static_cast<double>(s - nb) / static_cast<double>(dd);
            const auto n_pre = static_cast<std::size_t>(std::llround((1.0 - weight) * static_cast<double>(size)));
            std::vector<std::size_t> order(size);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::shuffle(order.begin(), order.end(), rng_);
            std::vector<char> from_post(size, 0);
            for (std::size_t r = n_pre; r < size; ++r) from_post[order[r]] = 1;

            const auto pre_rows = pair_.pre.row_components(size);
            const auto post_rows = pair_.post.row_components(size);
            inst.rows.resize(static_cast<Eigen::Index>(size), pair_.pre.dim());
            inst.labels.resize(size);
            for (std::size_t i = 0; i < size; ++i) {
                const auto& model = from_post[i] ? pair_.post : pair_.pre;
                const int c = from_post[i] ? post_rows[i] : pre_rows[i];
                inst.rows.row(static_cast<Eigen::Index>(i)) =
                    model.components()[static_cast<std::size_t>(c)].sample(rng_).transpose();
                inst.labels[i] = from_post[i] ? c + spec_.clusters_before : c;
            }
        }
        return inst;
    }

private:
    static void fill(LatentInstance& inst, MixtureSample sample, int label_offset) {
        inst.rows = std::move(sample.rows);
        inst.labels = std::move(sample.components);
        for (auto& l : inst.labels) l += label_offset;
    }

    StreamSpec spec_;
    ModelPair pair_;
    std::mt19937_64 rng_;
    std::int64_t emitted_ = 0;
};

struct GeneratedStream {
    ModelPair models;
    std::vector<LatentInstance> instances;
    std::int64_t drift_start = 0;
    std::int64_t drift_end = 0;
};

inline GeneratedStream generate_instances(const StreamSpec& spec) {
    StreamGenerator gen(spec);
    GeneratedStream out;
    while (!gen.done()) out.instances.push_back(gen.next_instance());
    out.models = gen.models();
    out.drift_start = spec.instances_before;
    out.drift_end = spec.instances_before + spec.drift_duration;
    return out;
}

/// key=value lines describing a generated stream.
inline void write_manifest(std::ostream& out, const StreamSpec& spec, const GeneratedStream& gs) {
    out << "drift_type=" << to_string(spec.drift_type) << '\n'
        << "drift_duration=" << spec.drift_duration << '\n'
        << "drift_magnitude=" << format_real(spec.drift_magnitude) << '\n'
        << "drift_precision=" << format_real(spec.drift_precision) << '\n'
        << "clusters_before=" << spec.clusters_before << '\n'
        << "clusters_after=" << spec.clusters_after << '\n'
        << "latent_features=" << spec.latent_features << '\n'
        << "instance_size=" << spec.instance_size << '\n'
        << "instances_before=" << spec.instances_before << '\n'
        << "total_instances=" << spec.total_instances << '\n'
        << "seed=" << spec.seed << '\n'
        << "measured_js=" << format_real(gs.models.distance) << '\n'
        << "attempts=" << gs.models.attempts << '\n'
        << "drift_start=" << gs.drift_start << '\n'
        << "drift_end=" << gs.drift_end << '\n';
}

inline std::map<std::string, std::string> read_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
        kv[std::string(detail::trim(body.substr(0, eq)))] = std::string(detail::trim(body.substr(eq + 1)));
    }
    return kv;
}

/// Writes the stream CSV and its manifest.
inline GeneratedStream generate_stream(const StreamSpec& spec, const std::string& stream_path,
                                       const std::string& manifest_path) {
    auto gs = generate_instances(spec);
    std::ofstream out(stream_path, std::ios::binary);
    if (!out) throw IoError("cannot write stream file '" + stream_path + "'");
    write_latent_stream(out, gs.instances);
    if (!out) throw IoError("write failed for '" + stream_path + "'");
    std::ofstream man(manifest_path, std::ios::binary);
    if (!man) throw IoError("cannot write manifest '" + manifest_path + "'");
    write_manifest(man, spec, gs);
    if (!man) throw IoError("write failed for '" + manifest_path + "'");
    return gs;
}

}  // namespace dendrift
