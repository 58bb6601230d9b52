/* C API for the LOMAQ lab: config-driven experiments behind opaque handles. */
#ifndef LOMAQ_H
#define LOMAQ_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lomaq_status {
    LOMAQ_OK = 0,
    LOMAQ_ERR_INVALID_ARGUMENT = 1,
    LOMAQ_ERR_CONFIG = 2,
    LOMAQ_ERR_IO = 3,
    LOMAQ_ERR_RUNTIME = 4
} lomaq_status;

typedef struct lomaq_config lomaq_config;
typedef struct lomaq_graph lomaq_graph;

const char *lomaq_version(void);

/* Message of the most recent failing call on this thread ("" when none). */
const char *lomaq_last_error(void);

/* ---- configuration ----
 * Flat INI model: sections of key = value pairs. Files use
 *   [section]
 *   key = value
 */
lomaq_status lomaq_config_create(lomaq_config **out);
lomaq_status lomaq_config_load(lomaq_config *cfg, const char *path);
lomaq_status lomaq_config_set(lomaq_config *cfg, const char *section, const char *key,
                              const char *value);
/* Copies the stored value (NUL terminated) into buf; fails if missing. */
lomaq_status lomaq_config_get(const lomaq_config *cfg, const char *section, const char *key,
                              char *buf, size_t buf_len);
void lomaq_config_destroy(lomaq_config *cfg);

/* Runs the experiment selected by [run] kind = train | bandit | eval |
 * matrix-game | decompose-viz. out_dir overrides [run] out when non-NULL.
 * The LOMAQ_LAB_OUT environment variable reroots relative output paths. */
lomaq_status lomaq_run(const lomaq_config *cfg, const char *out_dir);

/* ---- agent graphs ----
 * File format: first line the agent count n, then one "i j" line per edge.
 */
lomaq_status lomaq_graph_load(const char *path, lomaq_graph **out);
lomaq_status lomaq_graph_line(int num_agents, lomaq_graph **out);
int lomaq_graph_num_agents(const lomaq_graph *g);
/* Agents within kappa hops of `agent` (ascending). out_len gets the count;
 * fails with LOMAQ_ERR_INVALID_ARGUMENT when buf_len is too small. */
lomaq_status lomaq_graph_k_hop(const lomaq_graph *g, int agent, int kappa, int *out_buf,
                               int buf_len, int *out_len);
void lomaq_graph_destroy(lomaq_graph *g);

#ifdef __cplusplus
}
#endif

#endif /* LOMAQ_H */
