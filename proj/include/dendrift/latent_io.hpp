#pragma once

// Latent-instance streams: one matrix of host latent vectors per interval,
// stored as CSV "instance,host,f0..f{k-1}[,label]", one row per host.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "dendrift/errors.hpp"
#include "dendrift/event_ingest.hpp"

namespace dendrift {

struct LatentInstance {
    std::int64_t index = 0;
    Eigen::MatrixXd rows;     // hosts x features
    std::vector<int> labels;  // empty when unlabeled
    std::vector<std::string> hosts;  // empty means host i is named "i"

    std::size_t size() const noexcept { return static_cast<std::size_t>(rows.rows()); }
    std::size_t features() const noexcept { return static_cast<std::size_t>(rows.cols()); }
    bool labeled() const noexcept { return !labels.empty(); }

    std::string host_name(std::size_t i) const { return hosts.empty() ? std::to_string(i) : hosts[i]; }
};

/// Shortest round-trip decimal form; stable across runs on a given platform.
inline std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return std::to_string(v);
    return std::string(buf, ptr);
}

/// Fixed-precision form for reports.
inline std::string format_fixed(double v, int digits = 6) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
    if (ec != std::errc{}) return std::to_string(v);
    return std::string(buf, ptr);
}

inline void write_latent_header(std::ostream& out, std::size_t features, bool labeled) {
    out << "instance,host";
    for (std::size_t j = 0; j < features; ++j) out << ",f" << j;
    if (labeled) out << ",label";
    out << '\n';
}

inline void write_latent_rows(std::ostream& out, const LatentInstance& inst) {
    for (std::size_t i = 0; i < inst.size(); ++i) {
        out << inst.index << ',' << inst.host_name(i);
        for (std::size_t j = 0; j < inst.features(); ++j) {
            out << ',' << format_real(inst.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
        if (inst.labeled()) out << ',' << inst.labels[i];
        out << '\n';
    }
}

inline void write_latent_stream(std::ostream& out, const std::vector<LatentInstance>& stream) {
    if (stream.empty()) return;
    write_latent_header(out, stream.front().features(), stream.front().labeled());
    for (const auto& inst : stream) write_latent_rows(out, inst);
}

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                               : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline double parse_real(std::string_view text, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError(line, "not a real number: '" + std::string(text) + "'");
    }
    return v;
}

inline long long parse_signed(std::string_view text, std::size_t line) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError(line, "not an integer: '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace detail

/// Reads a latent-instance stream. Consecutive rows with the same instance
/// index form one instance; instance indices must be non-decreasing.
inline std::vector<LatentInstance> read_latent_stream(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t features = 0;
    bool labeled = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto cols = detail::split_csv(body);
        if (cols.size() < 3 || cols[0] != "instance" || cols[1] != "host") {
            throw ParseError(line_no, "expected header 'instance,host,f0,...'");
        }
        labeled = cols.back() == "label";
        features = cols.size() - 2 - (labeled ? 1 : 0);
        for (std::size_t j = 0; j < features; ++j) {
            if (cols[2 + j] != "f" + std::to_string(j)) {
                throw ParseError(line_no, "expected feature column f" + std::to_string(j));
            }
        }
        break;
    }
    if (features == 0) throw ParseError(line_no, "missing or featureless header");

    std::vector<LatentInstance> stream;
    std::vector<std::vector<double>> pending;
    std::vector<int> pending_labels;
    std::vector<std::string> pending_hosts;
    bool named_hosts = false;
    std::int64_t current = -1;

    auto flush = [&] {
        if (pending.empty()) return;
        LatentInstance inst;
        inst.index = current;
        inst.rows.resize(static_cast<Eigen::Index>(pending.size()), static_cast<Eigen::Index>(features));
        for (std::size_t i = 0; i < pending.size(); ++i) {
            for (std::size_t j = 0; j < features; ++j) {
                inst.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pending[i][j];
            }
        }
        inst.labels = std::move(pending_labels);
        if (named_hosts) inst.hosts = std::move(pending_hosts);
        stream.push_back(std::move(inst));
        pending.clear();
        pending_labels.clear();
        pending_hosts.clear();
        named_hosts = false;
    };

    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto cols = detail::split_csv(body);
        if (cols.size() != 2 + features + (labeled ? 1 : 0)) {
            throw ParseError(line_no, "expected " + std::to_string(2 + features + (labeled ? 1 : 0)) +
                                          " fields, got " + std::to_string(cols.size()));
        }
        const auto idx = detail::parse_signed(cols[0], line_no);
        if (idx < 0) throw ParseError(line_no, "negative instance index");
        if (idx != current) {
            if (idx < current) throw ParseError(line_no, "instance indices must be non-decreasing");
            flush();
            current = idx;
        }
        const std::string host(cols[1]);
        if (host != std::to_string(pending.size())) named_hosts = true;
        pending_hosts.push_back(host);
        std::vector<double> row(features);
        for (std::size_t j = 0; j < features; ++j) row[j] = detail::parse_real(cols[2 + j], line_no);
        pending.push_back(std::move(row));
        if (labeled) pending_labels.push_back(static_cast<int>(detail::parse_signed(cols.back(), line_no)));
    }
    flush();
    return stream;
}

inline std::vector<LatentInstance> read_latent_stream(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open latent stream '" + path + "'");
    return read_latent_stream(in);
}

}  // namespace dendrift
