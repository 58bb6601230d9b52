#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "lomaq/lomaq.h"

namespace fs = std::filesystem;

TEST_CASE("version and error strings are always available") {
    REQUIRE(lomaq_version() != nullptr);
    CHECK(std::strlen(lomaq_version()) > 0);
    REQUIRE(lomaq_last_error() != nullptr);
}

TEST_CASE("config create / set / get round trip") {
    lomaq_config *cfg = nullptr;
    REQUIRE(lomaq_config_create(&cfg) == LOMAQ_OK);
    CHECK(lomaq_config_set(cfg, "run", "kind", "train") == LOMAQ_OK);
    char buf[64];
    CHECK(lomaq_config_get(cfg, "run", "kind", buf, sizeof(buf)) == LOMAQ_OK);
    CHECK(std::string(buf) == "train");

    CHECK(lomaq_config_get(cfg, "run", "missing", buf, sizeof(buf)) == LOMAQ_ERR_CONFIG);
    CHECK(std::strlen(lomaq_last_error()) > 0);

    char tiny[3];
    CHECK(lomaq_config_get(cfg, "run", "kind", tiny, sizeof(tiny)) ==
          LOMAQ_ERR_INVALID_ARGUMENT);

    CHECK(lomaq_config_set(nullptr, "a", "b", "c") == LOMAQ_ERR_INVALID_ARGUMENT);
    lomaq_config_destroy(cfg);
}

TEST_CASE("config file loading merges over programmatic values") {
    const fs::path path = fs::temp_directory_path() / "lomaq_capi_cfg.ini";
    {
        std::ofstream out(path);
        out << "[env]\nname = matrix_game\n";
    }
    lomaq_config *cfg = nullptr;
    REQUIRE(lomaq_config_create(&cfg) == LOMAQ_OK);
    CHECK(lomaq_config_set(cfg, "env", "name", "overwritten") == LOMAQ_OK);
    CHECK(lomaq_config_load(cfg, path.string().c_str()) == LOMAQ_OK);
    char buf[64];
    CHECK(lomaq_config_get(cfg, "env", "name", buf, sizeof(buf)) == LOMAQ_OK);
    CHECK(std::string(buf) == "matrix_game");
    CHECK(lomaq_config_load(cfg, "no_such_file.ini") == LOMAQ_ERR_IO);
    lomaq_config_destroy(cfg);
    fs::remove(path);
}

TEST_CASE("run dispatches and surfaces config errors") {
    lomaq_config *cfg = nullptr;
    REQUIRE(lomaq_config_create(&cfg) == LOMAQ_OK);
    CHECK(lomaq_run(cfg, nullptr) == LOMAQ_ERR_CONFIG); // missing kind
    CHECK(std::strlen(lomaq_last_error()) > 0);

    // a tiny bandit run end to end through the C surface
    const fs::path csv = fs::temp_directory_path() / "lomaq_capi_bandit.csv";
    lomaq_config_set(cfg, "run", "kind", "bandit");
    lomaq_config_set(cfg, "run", "seeds", "0");
    lomaq_config_set(cfg, "bandit", "n", "2");
    lomaq_config_set(cfg, "bandit", "k", "2");
    lomaq_config_set(cfg, "bandit", "d", "2");
    lomaq_config_set(cfg, "bandit", "horizon", "30");
    CHECK(lomaq_run(cfg, csv.string().c_str()) == LOMAQ_OK);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "seed,t,cumulative_regret");
    int rows = 0;
    for (std::string line; std::getline(in, line);)
        ++rows;
    CHECK(rows == 30);
    lomaq_config_destroy(cfg);
    fs::remove(csv);
}

TEST_CASE("graph handles: line construction, file io, k-hop queries") {
    lomaq_graph *g = nullptr;
    REQUIRE(lomaq_graph_line(5, &g) == LOMAQ_OK);
    CHECK(lomaq_graph_num_agents(g) == 5);
    int buf[8];
    int len = 0;
    CHECK(lomaq_graph_k_hop(g, 2, 1, buf, 8, &len) == LOMAQ_OK);
    REQUIRE(len == 3);
    CHECK(buf[0] == 1);
    CHECK(buf[1] == 2);
    CHECK(buf[2] == 3);
    CHECK(lomaq_graph_k_hop(g, 2, 2, buf, 2, &len) == LOMAQ_ERR_INVALID_ARGUMENT);
    CHECK(lomaq_graph_k_hop(g, 9, 1, buf, 8, &len) == LOMAQ_ERR_INVALID_ARGUMENT);
    lomaq_graph_destroy(g);

    CHECK(lomaq_graph_line(0, &g) == LOMAQ_ERR_INVALID_ARGUMENT);
    CHECK(lomaq_graph_load("no_such_graph.txt", &g) == LOMAQ_ERR_IO);

    const fs::path path = fs::temp_directory_path() / "lomaq_capi_graph.txt";
    {
        std::ofstream out(path);
        out << "3\n0 1\n1 2\n";
    }
    REQUIRE(lomaq_graph_load(path.string().c_str(), &g) == LOMAQ_OK);
    CHECK(lomaq_graph_num_agents(g) == 3);
    CHECK(lomaq_graph_k_hop(g, 0, 2, buf, 8, &len) == LOMAQ_OK);
    CHECK(len == 3);
    lomaq_graph_destroy(g);
    fs::remove(path);
}
