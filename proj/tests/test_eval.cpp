#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "oaae/eval.hpp"
#include "test_support.hpp"

using namespace oaae;

namespace {

// O(n^2) pairwise oracle: wins + half-ties over all (novel, normal) pairs.
double brute_auroc(const std::vector<double>& scores, const std::vector<char>& novel) {
    double wins = 0.0;
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!novel[i]) continue;
        ++n_pos;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (novel[j]) continue;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    n_neg = scores.size() - n_pos;
    return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

} // namespace

TEST_CASE("auroc fixtures") {
    {
        std::vector<double> s = {0.1, 0.2, 0.8, 0.9};
        std::vector<char> f = {0, 0, 1, 1};
        CHECK(auroc(s, f) == 1.0);
    }
    {
        std::vector<double> s = {0.5, 0.5, 0.5, 0.5};
        std::vector<char> f = {0, 1, 0, 1};
        CHECK(auroc(s, f) == 0.5);
    }
    {
        // normal {1, 3}, novel {2, 4}: three of four pairs won, no ties
        std::vector<double> s = {1.0, 2.0, 3.0, 4.0};
        std::vector<char> f = {0, 1, 0, 1};
        CHECK(auroc(s, f) == 0.75);
    }
}

TEST_CASE("auroc requires both classes") {
    std::vector<double> s = {0.1, 0.2};
    std::vector<char> all_novel = {1, 1};
    std::vector<char> all_normal = {0, 0};
    CHECK_THROWS_AS(auroc(s, all_novel), UndefinedAurocError);
    CHECK_THROWS_AS(auroc(s, all_normal), UndefinedAurocError);
    CHECK_THROWS_AS(auroc(std::vector<double>{}, std::vector<char>{}), UndefinedAurocError);
}

TEST_CASE("sort-based auroc equals the pairwise oracle exactly, ties included") {
    Rng rng(31337);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(199);
        std::vector<double> scores(n);
        std::vector<char> novel(n);
        const bool tie_heavy = trial % 2 == 0;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = tie_heavy ? static_cast<double>(rng.uniform_index(4)) : rng.normal();
            novel[i] = rng.uniform() < 0.35 ? 1 : 0;
        }
        std::size_t pos = 0;
        for (char f : novel) pos += f;
        if (pos == 0) novel[0] = 1;
        if (pos == n) novel[0] = 0;

        CHECK(auroc(scores, novel) == brute_auroc(scores, novel));
    }
}

TEST_CASE("auroc is invariant under strictly increasing transforms") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + rng.uniform_index(80);
        std::vector<double> scores(n), transformed(n);
        std::vector<char> novel(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.normal();
            transformed[i] = std::exp(scores[i]);
            novel[i] = i % 4 == 0 ? 1 : 0;
        }
        CHECK(std::abs(auroc(scores, novel) - auroc(transformed, novel)) < 1e-12);
    }
}

TEST_CASE("flipping the flags complements the auroc when scores are distinct") {
    Rng rng(42);
    const std::size_t n = 50;
    std::vector<double> scores(n);
    std::vector<char> novel(n), flipped(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = static_cast<double>(i) + rng.uniform() * 0.5; // distinct
        novel[i] = rng.uniform() < 0.5 ? 1 : 0;
        flipped[i] = novel[i] ? 0 : 1;
    }
    if (std::count(novel.begin(), novel.end(), 1) == 0) novel[0] = 1, flipped[0] = 0;
    if (std::count(novel.begin(), novel.end(), 1) == static_cast<long>(n)) novel[0] = 0, flipped[0] = 1;
    CHECK(std::abs(auroc(scores, novel) + auroc(scores, flipped) - 1.0) < 1e-12);
}

TEST_CASE("run_protocol produces a cell in range on a tiny synthetic problem") {
    Dataset train = synthetic_multimodal(2, 40, 8, 11);
    train.split = "train";
    Dataset test = synthetic_multimodal(2, 15, 8, 12);
    test.split = "test";

    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 16;
    cfg.latent_dim = 6;
    cfg.base_channels = 2;
    cfg.fc_hidden = 8;
    cfg.seed = 5;

    ProtocolSpec spec;
    spec.novelty_classes = {1};
    spec.seed = 5;

    EvalReport report = run_protocol(train, test, spec, cfg);
    REQUIRE(report.cells.size() == 1);
    CHECK(report.cells[0].ok);
    CHECK(report.cells[0].auroc_value >= 0.0);
    CHECK(report.cells[0].auroc_value <= 1.0);
}

TEST_CASE("run_protocol marks a failed cell instead of aborting the sweep") {
    Dataset train = synthetic_multimodal(2, 30, 8, 21);
    // test split with only the novelty class present -> undefined auroc
    Dataset test = synthetic_multimodal(2, 10, 8, 22);
    test = filter_and_remap(test, {1});
    // restore the 2-class labeling so class 1 exists as id 1 again
    for (int& l : test.labels) l = 1;
    test.num_classes = 2;

    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 16;
    cfg.latent_dim = 4;
    cfg.base_channels = 2;
    cfg.fc_hidden = 8;

    ProtocolSpec spec;
    spec.novelty_classes = {1};

    EvalReport report = run_protocol(train, test, spec, cfg);
    REQUIRE(report.cells.size() == 1);
    CHECK(!report.cells[0].ok);
    CHECK(!report.cells[0].error.empty());
    CHECK(std::isnan(report.mean_auroc()));
}

TEST_CASE("eval csv and table render one column per class plus mean") {
    EvalReport r;
    r.method_label = "oaae";
    r.num_classes = 3;
    r.config_json = "{}";
    r.cells = {{0, 0.91, true, "", 0}, {1, 0.88, true, "", 0}, {2, 0.0, false, "boom", 0}};

    const std::string path = "eval_render.csv";
    write_eval_csv(std::vector<EvalReport>{r}, path);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "method,class_0,class_1,class_2,mean");
    CHECK(row.find("oaae,0.9100,0.8800,NA,0.8950") == 0);
    std::remove(path.c_str());

    std::string table = render_eval_table(std::vector<EvalReport>{r});
    CHECK(table.find("Mean") != std::string::npos);
    CHECK(table.find("NA") != std::string::npos);
    CHECK(table.find("0.9100") != std::string::npos);
}
