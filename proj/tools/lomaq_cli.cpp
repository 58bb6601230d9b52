// Command-line front end; talks to the lab exclusively through the C API.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lomaq/lomaq.h"

namespace {

struct ConfigHandle {
    lomaq_config *cfg = nullptr;
    ConfigHandle() {
        if (lomaq_config_create(&cfg) != LOMAQ_OK) {
            std::fprintf(stderr, "error: %s\n", lomaq_last_error());
            std::exit(1);
        }
    }
    ~ConfigHandle() { lomaq_config_destroy(cfg); }
    ConfigHandle(const ConfigHandle &) = delete;
    ConfigHandle &operator=(const ConfigHandle &) = delete;
};

void die(lomaq_status status) {
    if (status != LOMAQ_OK) {
        std::fprintf(stderr, "error: %s\n", lomaq_last_error());
        std::exit(status);
    }
}

void set(lomaq_config *cfg, const std::string &section, const std::string &key,
         const std::string &value) {
    die(lomaq_config_set(cfg, section.c_str(), key.c_str(), value.c_str()));
}

// generic overrides: section.key=value
void apply_overrides(lomaq_config *cfg, const std::vector<std::string> &overrides) {
    for (const auto &entry : overrides) {
        const auto eq = entry.find('=');
        const auto dot = entry.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
            std::fprintf(stderr, "error: --set expects section.key=value, got '%s'\n",
                         entry.c_str());
            std::exit(1);
        }
        set(cfg, entry.substr(0, dot), entry.substr(dot + 1, eq - dot - 1),
            entry.substr(eq + 1));
    }
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"lomaq: partition-based multi-agent Q-learning lab"};
    app.require_subcommand(1);

    // shared state filled by whichever subcommand runs
    std::string config_file, out, env_name, partition, seeds, checkpoint;
    long steps = -1, horizon = -1, samples = -1;
    int n = -1, k = -1, d = -1, episodes = -1, max_card = -1;
    double alpha = -1, lambda = -1, delta = -1, sigma = -1, rd_lambda = -1;
    long seed = -1;
    std::vector<std::string> overrides;

    auto add_common = [&](CLI::App *cmd) {
        cmd->add_option("--config", config_file, "INI config file");
        cmd->add_option("--out", out, "output directory or file");
        cmd->add_option("--set", overrides, "override entries as section.key=value");
    };

    CLI::App *train = app.add_subcommand("train", "train LOMAQ / IQL on an environment");
    add_common(train);
    train->add_option("--env", env_name, "environment name");
    train->add_option("--seed", seed, "single seed (overrides the seed list)");
    train->add_option("--seeds", seeds, "comma-separated seed list");
    train->add_option("--steps", steps, "environment steps per run");
    train->add_option("--partition", partition, "singletons | joint | <file>");

    CLI::App *bandit = app.add_subcommand("bandit-run", "Multi-OFUL regret experiment");
    add_common(bandit);
    bandit->add_option("--n", n, "number of agents");
    bandit->add_option("--k", k, "actions per agent");
    bandit->add_option("--d", d, "context dimension");
    bandit->add_option("--horizon", horizon, "rounds per run");
    bandit->add_option("--partition", partition, "singletons | joint | <file>");
    bandit->add_option("--alpha", alpha, "exploration multiplier");
    bandit->add_option("--lambda", lambda, "ridge regularizer");
    bandit->add_option("--delta", delta, "confidence level");
    bandit->add_option("--sigma", sigma, "reward noise std");
    bandit->add_option("--seeds", seeds, "comma-separated seed list");

    CLI::App *eval = app.add_subcommand("eval", "evaluate a checkpoint greedily");
    add_common(eval);
    eval->add_option("--env", env_name, "environment name");
    eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    eval->add_option("--episodes", episodes, "evaluation episodes");
    eval->add_option("--seed", seed, "seed");
    std::string trajectory;
    eval->add_option("--dump-trajectory", trajectory, "write one greedy episode as CSV");

    CLI::App *viz = app.add_subcommand("decompose-viz",
                                       "reward decomposition grid on 2-agent navigation");
    add_common(viz);
    viz->add_option("--env", env_name, "environment (nav2)");
    viz->add_option("--max-card", max_card, "largest learned subset size");
    viz->add_option("--lambda", rd_lambda, "L1 weight on subset outputs");
    viz->add_option("--seed", seed, "seed");
    viz->add_option("--steps", steps, "decomposer training steps");
    viz->add_option("--samples", samples, "dataset size");

    CLI::App *game = app.add_subcommand("matrix-game", "payoff-game representability runs");
    add_common(game);
    game->add_option("--partition", partition, "singletons | joint");
    game->add_option("--seed", seed, "single seed");
    game->add_option("--seeds", seeds, "comma-separated seed list");
    game->add_option("--steps", steps, "training steps");

    CLI11_PARSE(app, argc, argv);

    ConfigHandle handle;
    lomaq_config *cfg = handle.cfg;
    if (!config_file.empty())
        die(lomaq_config_load(cfg, config_file.c_str()));

    auto set_if = [&](bool given, const char *section, const char *key, const std::string &v) {
        if (given)
            set(cfg, section, key, v);
    };

    std::string kind;
    if (train->parsed()) {
        kind = "train";
        set_if(!env_name.empty(), "env", "name", env_name);
        set_if(seed >= 0, "run", "seeds", std::to_string(seed));
        set_if(!seeds.empty(), "run", "seeds", seeds);
        set_if(steps >= 0, "run", "steps", std::to_string(steps));
        set_if(!partition.empty(), "algo", "partition", partition);
    } else if (bandit->parsed()) {
        kind = "bandit";
        set_if(n >= 0, "bandit", "n", std::to_string(n));
        set_if(k >= 0, "bandit", "k", std::to_string(k));
        set_if(d >= 0, "bandit", "d", std::to_string(d));
        set_if(horizon >= 0, "bandit", "horizon", std::to_string(horizon));
        set_if(!partition.empty(), "bandit", "partition", partition);
        set_if(alpha >= 0, "bandit", "alpha", std::to_string(alpha));
        set_if(lambda >= 0, "bandit", "lambda", std::to_string(lambda));
        set_if(delta >= 0, "bandit", "delta", std::to_string(delta));
        set_if(sigma >= 0, "bandit", "sigma", std::to_string(sigma));
        set_if(!seeds.empty(), "run", "seeds", seeds);
    } else if (eval->parsed()) {
        kind = "eval";
        set_if(!env_name.empty(), "env", "name", env_name);
        set(cfg, "eval", "checkpoint", checkpoint);
        set_if(episodes >= 0, "eval", "episodes", std::to_string(episodes));
        set_if(!trajectory.empty(), "eval", "trajectory", trajectory);
        set_if(seed >= 0, "run", "seeds", std::to_string(seed));
    } else if (viz->parsed()) {
        kind = "decompose-viz";
        set_if(!env_name.empty(), "env", "name", env_name);
        set_if(max_card >= 0, "rd", "max_card", std::to_string(max_card));
        set_if(rd_lambda >= 0, "rd", "lambda", std::to_string(rd_lambda));
        set_if(seed >= 0, "run", "seeds", std::to_string(seed));
        set_if(steps >= 0, "run", "steps", std::to_string(steps));
        set_if(samples >= 0, "run", "samples", std::to_string(samples));
    } else if (game->parsed()) {
        kind = "matrix-game";
        set_if(!partition.empty(), "algo", "partition", partition);
        set_if(seed >= 0, "run", "seeds", std::to_string(seed));
        set_if(!seeds.empty(), "run", "seeds", seeds);
        set_if(steps >= 0, "run", "steps", std::to_string(steps));
    }
    set(cfg, "run", "kind", kind);
    apply_overrides(cfg, overrides);

    die(lomaq_run(cfg, out.empty() ? nullptr : out.c_str()));
    return 0;
}
