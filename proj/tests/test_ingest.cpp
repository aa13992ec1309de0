#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "dendrift/event_ingest.hpp"

using namespace dendrift;

TEST(ParseEventLine, MapsFields) {
    EXPECT_EQ(parse_event_line("h1,p1,0,3"), (EventRecord{"h1", "p1", 0, 3}));
    EXPECT_EQ(parse_event_line(" h1 , p1 , 4 , 0 "), (EventRecord{"h1", "p1", 4, 0}));
}

TEST(ParseEventLine, RejectsNegativeCount) {
    try {
        parse_event_line("h1,p1,0,-2", 7);
        FAIL() << "no error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 7u);
    }
}

TEST(ParseEventLine, RejectsMalformed) {
    EXPECT_THROW(parse_event_line("h1,p1,0"), ParseError);
    EXPECT_THROW(parse_event_line("h1,p1,x,1"), ParseError);
    EXPECT_THROW(parse_event_line("h1,p1,0,1.5"), ParseError);
    EXPECT_THROW(parse_event_line(",p1,0,1"), ParseError);
    EXPECT_THROW(parse_event_line("h1,p1,0,1,9"), ParseError);
}

TEST(ParseEventLog, FixtureInFileOrder) {
    std::istringstream in("# host,process,date,count\nh2,sshd,0,4\n\nh1,bash,0,1\nh1,sshd,1,2\n");
    const auto recs = parse_event_log(in);
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0], (EventRecord{"h2", "sshd", 0, 4}));
    EXPECT_EQ(recs[1], (EventRecord{"h1", "bash", 0, 1}));
    EXPECT_EQ(recs[2], (EventRecord{"h1", "sshd", 1, 2}));
}

TEST(ParseEventLog, ErrorCarriesLineNumber) {
    std::istringstream in("h1,p1,0,1\n# c\nh1,p1,0,-1\n");
    try {
        parse_event_log(in);
        FAIL() << "no error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(IngestEventLog, MissingFile) { EXPECT_THROW(ingest_event_log("/nonexistent/events.csv"), IoError); }

TEST(BuildMatrix, PlacesCounts) {
    std::vector<EventRecord> ev{{"h1", "p1", 0, 3}, {"h1", "p2", 0, 1}};
    const auto M = build_matrix(ev, 0);
    ASSERT_EQ(M.rows(), 1u);
    ASSERT_EQ(M.cols(), 2u);
    EXPECT_EQ(M.at(0, 0), 3);
    EXPECT_EQ(M.at(0, 1), 1);
}

TEST(BuildMatrix, SumsDuplicates) {
    std::vector<EventRecord> ev{{"h1", "p1", 0, 3}, {"h1", "p1", 0, 2}};
    EXPECT_EQ(build_matrix(ev, 0).at(0, 0), 5);
}

TEST(BuildMatrix, FiltersInterval) {
    std::vector<EventRecord> ev{{"h1", "p1", 1, 3}, {"h2", "p1", 1, 2}};
    const auto M = build_matrix(ev, 0);
    EXPECT_TRUE(M.empty());
    EXPECT_EQ(M.rows(), 0u);
    EXPECT_EQ(M.cols(), 0u);
}

TEST(BuildMatrix, LexicographicOrder) {
    std::vector<EventRecord> ev{{"hb", "pz", 0, 1}, {"ha", "py", 0, 2}, {"hb", "px", 0, 3}};
    const auto M = build_matrix(ev, 0);
    EXPECT_EQ(M.hosts(), (std::vector<std::string>{"ha", "hb"}));
    EXPECT_EQ(M.processes(), (std::vector<std::string>{"px", "py", "pz"}));
    EXPECT_EQ(M.at(1, 0), 3);
    EXPECT_EQ(M.at(0, 1), 2);
}

TEST(BuildMatrix, RosterKeepsZeroRowsAndReportsUnseen) {
    std::vector<EventRecord> ev{{"h1", "p1", 0, 3}, {"h9", "p1", 0, 2}};
    std::vector<std::string> roster{"h2", "h1"};
    std::vector<std::string> unseen;
    const auto M = build_matrix(ev, 0, roster, &unseen);
    EXPECT_EQ(M.hosts(), (std::vector<std::string>{"h1", "h2"}));
    EXPECT_EQ(M.to_dense()(1, 0), 0.0);
    EXPECT_EQ(unseen, (std::vector<std::string>{"h9"}));
}

namespace {

std::vector<EventRecord> random_events(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> host(0, 9), proc(0, 14), date(0, 3), count(0, 50);
    std::vector<EventRecord> ev;
    for (std::size_t i = 0; i < n; ++i)
        ev.push_back({"h" + std::to_string(host(rng)), "p" + std::to_string(proc(rng)), date(rng), count(rng)});
    return ev;
}

}  // namespace

TEST(BuildMatrixProperty, TotalEqualsEventSum) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto ev = random_events(rng, 200);
        for (std::int64_t t = 0; t <= 3; ++t) {
            std::int64_t expect = 0;
            for (const auto& e : ev)
                if (e.date == t) expect += e.count;
            const auto M = build_matrix(ev, t);
            EXPECT_EQ(M.total(), expect);
            EXPECT_DOUBLE_EQ(M.to_dense().sum(), static_cast<double>(expect));
        }
    }
}

TEST(BuildMatrixProperty, IndependentOfEventOrder) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        auto ev = random_events(rng, 150);
        const auto a = build_matrix(ev, 1);
        std::shuffle(ev.begin(), ev.end(), rng);
        const auto b = build_matrix(ev, 1);
        EXPECT_EQ(a.hosts(), b.hosts());
        EXPECT_EQ(a.processes(), b.processes());
        EXPECT_EQ(a.to_dense(), b.to_dense());
    }
}

TEST(Intervals, SortedUnique) {
    std::vector<EventRecord> ev{{"a", "p", 3, 1}, {"b", "p", 1, 1}, {"a", "p", 3, 2}};
    EXPECT_EQ(intervals_of(ev), (std::vector<std::int64_t>{1, 3}));
    EXPECT_EQ(hosts_in_interval(ev, 3), (std::vector<std::string>{"a"}));
}
