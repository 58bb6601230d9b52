#include "lomaq/lomaq.h"

#include <cstring>
#include <stdexcept>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "harness.hpp"

struct lomaq_config {
    lomaq::Config cfg;
};

struct lomaq_graph {
    lomaq::AgentGraph graph;
};

namespace {

thread_local std::string t_last_error;

lomaq_status fail(lomaq_status code, const char *what) {
    t_last_error = what ? what : "";
    return code;
}

template <typename Fn> lomaq_status guarded(Fn &&fn) {
    try {
        fn();
        t_last_error.clear();
        return LOMAQ_OK;
    } catch (const lomaq::ConfigError &e) {
        return fail(LOMAQ_ERR_CONFIG, e.what());
    } catch (const lomaq::IoError &e) {
        return fail(LOMAQ_ERR_IO, e.what());
    } catch (const std::invalid_argument &e) {
        return fail(LOMAQ_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception &e) {
        return fail(LOMAQ_ERR_RUNTIME, e.what());
    } catch (...) {
        return fail(LOMAQ_ERR_RUNTIME, "unknown error");
    }
}

} // namespace

extern "C" {

const char *lomaq_version(void) { return "0.1.0"; }

const char *lomaq_last_error(void) { return t_last_error.c_str(); }

lomaq_status lomaq_config_create(lomaq_config **out) {
    if (!out)
        return fail(LOMAQ_ERR_INVALID_ARGUMENT, "out must not be NULL");
    return guarded([&] { *out = new lomaq_config(); });
}

lomaq_status lomaq_config_load(lomaq_config *cfg, const char *path) {
    if (!cfg || !path)
        return fail(LOMAQ_ERR_INVALID_ARGUMENT, "cfg and path must not be NULL");
    return guarded([&] {
        const auto loaded = lomaq::Config::load(path);
        // file contents merge over whatever was set before
        for (const auto &[section, kv] : loaded.raw())
            for (const auto &[key, value] : kv)
                cfg->cfg.set(section, key, value);
    });
}

lomaq_status lomaq_config_set(lomaq_config *cfg, const char *section, const char *key,
                              const char *value) {
    if (!cfg || !section || !key || !value)
        return fail(LOMAQ_ERR_INVALID_ARGUMENT, "all arguments must be non-NULL");
    return guarded([&] { cfg->cfg.set(section, key, value); });
}

lomaq_status lomaq_config_get(const lomaq_config *cfg, const char *section, const char *key,
                              char *buf, size_t buf_len) {
    if (!cfg || !section || !key || !buf || buf_len == 0)
        return fail(LOMAQ_ERR_INVALID_ARGUMENT, "all arguments must be non-NULL");
    return guarded([&] {
        if (!cfg->cfg.has(section, key))
            throw lomaq::ConfigError(std::string("no value for ") + section + "." + key);
        const std::string value = cfg->cfg.raw().at(section).at(key);
        if (value.size() + 1 > buf_len)
            throw std::invalid_argument("buffer too small");
        std::memcpy(buf, value.c_str(), value.size() + 1);
    });
}

void lomaq_config_destroy(lomaq_config *cfg) { delete cfg; }

lomaq_status lomaq_run(const lomaq_config *cfg, const char *out_dir) {
    if (!cfg)
        return fail(LOMAQ_ERR_INVALID_ARGUMENT, "cfg must not be NULL");
    return guarded([&] { lomaq::run_experiment(cfg->cfg, out_dir ? out_dir : ""); });
}

lomaq_status lomaq_graph_load(const char *path, lomaq_graph **out) {
    if (!path || !out)
        return fail(LOMAQ_ERR_INVALID_ARGUMENT, "path and out must not be NULL");
    return guarded([&] { *out = new lomaq_graph{lomaq::AgentGraph::load(path)}; });
}

lomaq_status lomaq_graph_line(int num_agents, lomaq_graph **out) {
    if (!out)
        return fail(LOMAQ_ERR_INVALID_ARGUMENT, "out must not be NULL");
    return guarded([&] { *out = new lomaq_graph{lomaq::AgentGraph::line(num_agents)}; });
}

int lomaq_graph_num_agents(const lomaq_graph *g) { return g ? g->graph.num_agents() : 0; }

lomaq_status lomaq_graph_k_hop(const lomaq_graph *g, int agent, int kappa, int *out_buf,
                               int buf_len, int *out_len) {
    if (!g || !out_buf || !out_len)
        return fail(LOMAQ_ERR_INVALID_ARGUMENT, "g, out_buf and out_len must not be NULL");
    return guarded([&] {
        const auto ball = g->graph.k_hop(agent, kappa);
        if (static_cast<int>(ball.size()) > buf_len)
            throw std::invalid_argument("buffer too small for k-hop set");
        int k = 0;
        for (int v : ball)
            out_buf[k++] = v;
        *out_len = k;
    });
}

void lomaq_graph_destroy(lomaq_graph *g) { delete g; }

} // extern "C"
