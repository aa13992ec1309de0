#pragma once

// Process-execution event logs and per-interval host-process count matrices.
//
// Log format: one record per line, "host_id,process_name,date,count".
// Blank lines and lines starting with '#' are ignored.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dendrift/errors.hpp"

namespace dendrift {

struct EventRecord {
    std::string host_id;
    std::string process_name;
    std::int64_t date = 0;
    std::int64_t count = 0;

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Sparse non-negative count matrix for one interval. Rows follow `hosts`,
/// columns follow `processes`; entries are stored row-major without zeros.
class HostProcessMatrix {
public:
    struct Entry {
        std::size_t row;
        std::size_t col;
        std::int64_t value;
    };

    HostProcessMatrix() = default;
    HostProcessMatrix(std::int64_t interval, std::vector<std::string> hosts,
                      std::vector<std::string> processes, std::vector<Entry> entries)
        : interval_(interval), hosts_(std::move(hosts)), processes_(std::move(processes)),
          entries_(std::move(entries)) {}

    std::int64_t interval() const noexcept { return interval_; }
    std::size_t rows() const noexcept { return hosts_.size(); }
    std::size_t cols() const noexcept { return processes_.size(); }
    bool empty() const noexcept { return hosts_.empty() || processes_.empty(); }

    const std::vector<std::string>& hosts() const noexcept { return hosts_; }
    const std::vector<std::string>& processes() const noexcept { return processes_; }
    std::span<const Entry> entries() const noexcept { return entries_; }

    std::int64_t at(std::size_t row, std::size_t col) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{row, col},
                                   [](const Entry& e, const std::pair<std::size_t, std::size_t>& key) {
                                       return std::pair{e.row, e.col} < key;
                                   });
        if (it != entries_.end() && it->row == row && it->col == col) return it->value;
        return 0;
    }

    std::int64_t total() const noexcept {
        std::int64_t sum = 0;
        for (const auto& e : entries_) sum += e.value;
        return sum;
    }

    Eigen::MatrixXd to_dense() const {
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows()),
                                                      static_cast<Eigen::Index>(cols()));
        for (const auto& e : entries_) {
            dense(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) =
                static_cast<double>(e.value);
        }
        return dense;
    }

private:
    std::int64_t interval_ = 0;
    std::vector<std::string> hosts_;
    std::vector<std::string> processes_;
    std::vector<Entry> entries_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

inline std::int64_t parse_int_field(std::string_view text, std::size_t line, const char* name) {
    text = trim(text);
    std::int64_t value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError(line, std::string("field '") + name + "' is not an integer: '" +
                                   std::string(text) + "'");
    }
    if (value < 0) {
        throw ParseError(line, std::string("field '") + name + "' is negative: " + std::to_string(value));
    }
    return value;
}

}  // namespace detail

/// Parses one non-comment log line. `line_no` is used for error reporting.
inline EventRecord parse_event_line(std::string_view line, std::size_t line_no = 0) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                             : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (fields.size() != 4) {
        throw ParseError(line_no, "expected 4 fields (host,process,date,count), got " +
                                      std::to_string(fields.size()));
    }
    EventRecord rec;
    rec.host_id = std::string(detail::trim(fields[0]));
    rec.process_name = std::string(detail::trim(fields[1]));
    if (rec.host_id.empty()) throw ParseError(line_no, "empty host_id");
    if (rec.process_name.empty()) throw ParseError(line_no, "empty process_name");
    rec.date = detail::parse_int_field(fields[2], line_no, "date");
    rec.count = detail::parse_int_field(fields[3], line_no, "count");
    return rec;
}

inline std::vector<EventRecord> parse_event_log(std::istream& in) {
    std::vector<EventRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        records.push_back(parse_event_line(body, line_no));
    }
    return records;
}

inline std::vector<EventRecord> ingest_event_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open event log '" + path + "'");
    return parse_event_log(in);
}

namespace detail {

inline HostProcessMatrix assemble(std::int64_t t, std::vector<std::string> hosts,
                                  const std::map<std::pair<std::string, std::string>, std::int64_t>& cells) {
    std::set<std::string> process_set;
    for (const auto& [key, value] : cells) process_set.insert(key.second);
    std::vector<std::string> processes(process_set.begin(), process_set.end());

    std::map<std::string, std::size_t> host_index;
    for (std::size_t i = 0; i < hosts.size(); ++i) host_index.emplace(hosts[i], i);
    std::map<std::string, std::size_t> process_index;
    for (std::size_t j = 0; j < processes.size(); ++j) process_index.emplace(processes[j], j);

    std::vector<HostProcessMatrix::Entry> entries;
    entries.reserve(cells.size());
    for (const auto& [key, value] : cells) {
        if (value == 0) continue;
        entries.push_back({host_index.at(key.first), process_index.at(key.second), value});
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return std::pair{a.row, a.col} < std::pair{b.row, b.col};
    });
    return HostProcessMatrix(t, std::move(hosts), std::move(processes), std::move(entries));
}

}  // namespace detail

/// Builds the host-process matrix for interval `t`. Duplicate (host, process)
/// pairs are summed; rows and columns are in lexicographic identifier order.
inline HostProcessMatrix build_matrix(std::span<const EventRecord> events, std::int64_t t) {
    std::map<std::pair<std::string, std::string>, std::int64_t> cells;
    std::set<std::string> host_set;
    for (const auto& e : events) {
        if (e.date != t) continue;
        cells[{e.host_id, e.process_name}] += e.count;
        host_set.insert(e.host_id);
    }
    if (cells.empty()) return HostProcessMatrix(t, {}, {}, {});
    return detail::assemble(t, std::vector<std::string>(host_set.begin(), host_set.end()), cells);
}

/// Roster variant: rows are exactly the (sorted) roster, hosts without events
/// get zero rows. Events from hosts outside the roster are dropped and their
/// identifiers are appended to `unseen` when given.
inline HostProcessMatrix build_matrix(std::span<const EventRecord> events, std::int64_t t,
                                      std::span<const std::string> roster,
                                      std::vector<std::string>* unseen = nullptr) {
    std::set<std::string> roster_set(roster.begin(), roster.end());
    std::set<std::string> dropped;
    std::map<std::pair<std::string, std::string>, std::int64_t> cells;
    for (const auto& e : events) {
        if (e.date != t) continue;
        if (!roster_set.contains(e.host_id)) {
            dropped.insert(e.host_id);
            continue;
        }
        cells[{e.host_id, e.process_name}] += e.count;
    }
    if (unseen) unseen->insert(unseen->end(), dropped.begin(), dropped.end());
    return detail::assemble(t, std::vector<std::string>(roster_set.begin(), roster_set.end()), cells);
}

/// Sorted, de-duplicated interval indices present in `events`.
inline std::vector<std::int64_t> intervals_of(std::span<const EventRecord> events) {
    std::set<std::int64_t> dates;
    for (const auto& e : events) dates.insert(e.date);
    return {dates.begin(), dates.end()};
}

/// Hosts that appear in interval `t`, sorted.
inline std::vector<std::string> hosts_in_interval(std::span<const EventRecord> events, std::int64_t t) {
    std::set<std::string> hosts;
    for (const auto& e : events) {
        if (e.date == t) hosts.insert(e.host_id);
    }
    return {hosts.begin(), hosts.end()};
}

}  // namespace dendrift
