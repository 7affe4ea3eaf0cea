#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include <json.hpp>

#include "covdiff/io.hpp"

using namespace covdiff;
namespace fs = std::filesystem;

namespace {

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& content, const std::string& name) {
        path = fs::temp_directory_path() / ("covdiff_io_test_" + name);
        io::write_text_file(path.string(), content);
    }
    ~TempFile() { std::remove(path.string().c_str()); }
};

}  // namespace

TEST_CASE("CSV loading") {
    SUBCASE("plain numeric body, no header") {
        TempFile f("1,2\n3,4\n5,6\n", "plain.csv");
        DataMatrix m = io::load_csv(f.path.string());
        CHECK(m.n() == 3);
        CHECK(m.p() == 2);
        CHECK_FALSE(m.column_names.has_value());
        CHECK(m.values(2, 1) == 6.0);
        CHECK(m.name_of(0) == "V1");
    }
    SUBCASE("header row with quoted names and CRLF endings") {
        TempFile f("\"height, cm\",weight\r\n1.5,2.5\r\n3.5,4.5\r\n", "crlf.csv");
        DataMatrix m = io::load_csv(f.path.string());
        REQUIRE(m.column_names.has_value());
        CHECK((*m.column_names)[0] == "height, cm");
        CHECK(m.name_of(1) == "weight");
        CHECK(m.n() == 2);
        CHECK(m.values(1, 0) == 3.5);
    }
    SUBCASE("blank lines are skipped") {
        TempFile f("1,2\n\n3,4\n\n", "blank.csv");
        CHECK(io::load_csv(f.path.string()).n() == 2);
    }
    SUBCASE("transpose flips the layout and drops names") {
        TempFile f("1,2,3\n4,5,6\n", "wide.csv");
        DataMatrix m = io::load_csv(f.path.string(), true);
        CHECK(m.n() == 3);
        CHECK(m.p() == 2);
        CHECK(m.values(0, 1) == 4.0);
        CHECK_FALSE(m.column_names.has_value());
    }
    SUBCASE("ragged rows are reported with the line number") {
        TempFile f("1,2\n3,4,5\n", "ragged.csv");
        CHECK_THROWS_WITH_AS(io::load_csv(f.path.string()),
                             doctest::Contains("line 2"), InputError);
    }
    SUBCASE("non-numeric cell after the header is an error with its position") {
        TempFile f("a,b\n1,2\n3,oops\n", "cell.csv");
        CHECK_THROWS_WITH_AS(io::load_csv(f.path.string()),
                             doctest::Contains("row 2, column 2"), InputError);
    }
    SUBCASE("empty and single-column inputs are rejected") {
        TempFile empty("", "empty.csv");
        CHECK_THROWS_AS(io::load_csv(empty.path.string()), ValidationError);
        TempFile narrow("1\n2\n", "narrow.csv");
        CHECK_THROWS_AS(io::load_csv(narrow.path.string()), ValidationError);
        CHECK_THROWS_AS(io::load_csv("/nonexistent/path.csv"), InputError);
    }
}

TEST_CASE("CSV round trip is exact") {
    std::mt19937_64 eng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    DataMatrix m;
    m.values.resize(7, 3);
    for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 3; ++c) m.values(r, c) = normal(eng) * std::pow(10.0, c - 1);
    m.column_names = std::vector<std::string>{"a", "b", "c"};

    TempFile f("", "roundtrip.csv");
    io::write_csv(f.path.string(), m);
    DataMatrix back = io::load_csv(f.path.string());
    CHECK(back.values == m.values);
    CHECK(back.column_names == m.column_names);
}

TEST_CASE("experiment config parsing") {
    SUBCASE("full file with comments and lists") {
        TempFile f(
            "# experiment grid\n"
            "cov = M3\n"
            "innov = D2   # innovation model\n"
            "p = 80, 160\n"
            "n1 = 50, 100\n"
            "n2 = 60, 100\n"
            "reps = 200\n"
            "alpha = 0.10\n"
            "B = 400\n"
            "alternative = true\n"
            "seed = 42\n",
            "full.cfg");
        io::ExperimentConfig cfg = io::parse_experiment_config(f.path.string());
        CHECK(cfg.cov == CovKind::M3);
        CHECK(cfg.innov == InnovKind::D2);
        CHECK(cfg.p_list == std::vector<int>{80, 160});
        REQUIRE(cfg.sample_sizes.size() == 2);
        CHECK(cfg.sample_sizes[0] == std::pair(50, 60));
        CHECK(cfg.sample_sizes[1] == std::pair(100, 100));
        CHECK(cfg.reps == 200);
        CHECK(cfg.alpha == 0.10);
        CHECK(cfg.B == 400);
        CHECK(cfg.alternative);
        CHECK(cfg.seed == 42);
    }
    SUBCASE("missing or mismatched lists fail") {
        TempFile no_p("cov = M1\nn1 = 50\nn2 = 50\n", "nop.cfg");
        CHECK_THROWS_AS(io::parse_experiment_config(no_p.path.string()), ValidationError);
        TempFile uneven("p = 10\nn1 = 50, 60\nn2 = 50\n", "uneven.cfg");
        CHECK_THROWS_AS(io::parse_experiment_config(uneven.path.string()), ValidationError);
    }
    SUBCASE("bad syntax and unknown keys fail with the line number") {
        TempFile bad("p 10\n", "bad.cfg");
        CHECK_THROWS_WITH_AS(io::parse_experiment_config(bad.path.string()),
                             doctest::Contains("line 1"), InputError);
        TempFile unknown("p = 10\nn1 = 5\nn2 = 5\nwhat = 3\n", "unknown.cfg");
        CHECK_THROWS_AS(io::parse_experiment_config(unknown.path.string()), Error);
    }
}

TEST_CASE("kind names round trip") {
    for (auto kind : {CovKind::M1, CovKind::M2, CovKind::M3, CovKind::M4})
        CHECK(io::parse_cov_kind(io::cov_kind_name(kind)) == kind);
    for (auto kind : {InnovKind::D1, InnovKind::D2, InnovKind::D3})
        CHECK(io::parse_innov_kind(io::innov_kind_name(kind)) == kind);
    CHECK_THROWS_AS(io::parse_cov_kind("M9"), ValidationError);
    CHECK_THROWS_AS(io::parse_innov_kind("gaussian"), ValidationError);
}

TEST_CASE("test report JSON layout") {
    TestReport boot;
    boot.statistic = 3.5;
    boot.critical_value = 3.1;
    boot.p_value = 0.002;
    boot.reject = true;
    boot.argmax_k = 0;
    boot.argmax_l = 2;
    boot.method = "bootstrap";
    boot.B = 500;
    boot.alpha = 0.05;
    boot.n = 40;
    boot.m = 50;
    boot.p = 3;
    TestReport clx;
    clx.method = "clx";
    clx.statistic = 3.5;
    clx.reject = false;

    DataMatrix unnamed;
    unnamed.values.resize(2, 3);
    unnamed.values.setZero();

    auto parsed = nlohmann::json::parse(io::test_report_json(boot, clx, unnamed, 12.5));
    CHECK(parsed["schema_version"] == 1);
    CHECK(parsed["statistic"] == 3.5);
    CHECK(parsed["reject"] == true);
    CHECK(parsed["argmax_pair"] == nlohmann::json::array({1, 3}));  // 1-based
    CHECK(parsed["clx"]["method"] == "clx");
    CHECK(parsed["clx"]["reject"] == false);
    CHECK(parsed["wall_time_ms"] == 12.5);

    DataMatrix named = unnamed;
    named.column_names = std::vector<std::string>{"x", "y", "z"};
    auto with_names = nlohmann::json::parse(io::test_report_json(boot, clx, named, 0.0));
    CHECK(with_names["argmax_pair"] == nlohmann::json::array({"x", "z"}));
}

TEST_CASE("experiment table TSV") {
    ExperimentSummary s;
    s.reps = 100;
    s.reject_bootstrap = 5;
    s.reject_clx = 9;
    std::vector<io::ExperimentRow> rows{{CovKind::M2, InnovKind::D1, 80, 50, 60, s, 0.05, 300}};
    const std::string tsv = io::experiment_table_tsv(rows);
    CHECK(tsv.find("cov\tinnov\tp\tn1\tn2") == 0);
    CHECK(tsv.find("M2\tD1\t80\t50\t60\t100") != std::string::npos);
    CHECK(tsv.find("0.05") != std::string::npos);
    CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 2);
}

TEST_CASE("dissimilarity TSV uses variable names") {
    Eigen::MatrixXd d(2, 2);
    d << 0.0, 0.25, 0.25, 0.0;
    DataMatrix x;
    x.values.resize(2, 2);
    x.values.setZero();
    x.column_names = std::vector<std::string>{"g1", "g2"};
    const std::string tsv = io::dissimilarity_tsv(d, x);
    CHECK(tsv == "\tg1\tg2\ng1\t0\t0.25\ng2\t0.25\t0\n");
}

TEST_CASE("Newick serialization with half-height branches") {
    DataMatrix x;
    x.values.resize(2, 3);
    x.values.setZero();
    x.column_names = std::vector<std::string>{"a", "b", "c"};

    SUBCASE("two leaves") {
        ClusterTree tree;
        tree.leaves = 2;
        tree.merges.push_back({0, 1, 0.5, 2});
        DataMatrix two;
        two.values.resize(2, 2);
        two.values.setZero();
        CHECK(io::to_newick(tree, two) == "(V1:0.25,V2:0.25);\n");
    }
    SUBCASE("three leaves, nested merge") {
        ClusterTree tree;
        tree.leaves = 3;
        tree.merges.push_back({0, 1, 1.0, 2});  // node 3
        tree.merges.push_back({3, 2, 3.0, 3});  // root
        // leaves under node 3 sit at depth 1.5 total: 0.5 inside, 1.0 above
        CHECK(io::to_newick(tree, x) == "((a:0.5,b:0.5):1,c:1.5);\n");
    }
}

TEST_CASE("cluster summary JSON") {
    ClusterPipelineResult result;
    result.s0 = 3;
    result.partition = block_partition(6, 3);
    result.rejected_blocks = 2;
    auto parsed = nlohmann::json::parse(io::cluster_summary_json(result, 0.05, 250, 7));
    CHECK(parsed["schema_version"] == 1);
    CHECK(parsed["s0"] == 3);
    CHECK(parsed["S"] == 3);
    CHECK(parsed["rejected_blocks"] == 2);
    CHECK(parsed["pi"] == 0.05);
    CHECK(parsed["B"] == 250);
    CHECK(parsed["seed"] == 7);
}
