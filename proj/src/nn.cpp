#include "nn.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "errors.hpp"

namespace lomaq {

namespace {
constexpr double kLeakySlope = 0.01;
constexpr double kEluAlpha = 1.0;
} // namespace

std::string activation_name(Activation a) {
    switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::LeakyRelu: return "leaky_relu";
    case Activation::Elu: return "elu";
    case Activation::Tanh: return "tanh";
    }
    return "identity";
}

Activation activation_from_name(const std::string &name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::Relu;
    if (name == "leaky_relu") return Activation::LeakyRelu;
    if (name == "elu") return Activation::Elu;
    if (name == "tanh") return Activation::Tanh;
    throw std::invalid_argument("unknown activation: " + name);
}

double activate(Activation a, double z) {
    switch (a) {
    case Activation::Identity: return z;
    case Activation::Relu: return z > 0.0 ? z : 0.0;
    case Activation::LeakyRelu: return z > 0.0 ? z : kLeakySlope * z;
    case Activation::Elu: return z > 0.0 ? z : kEluAlpha * (std::exp(z) - 1.0);
    case Activation::Tanh: return std::tanh(z);
    }
    return z;
}

double activate_grad(Activation a, double z) {
    switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::LeakyRelu: return z > 0.0 ? 1.0 : kLeakySlope;
    case Activation::Elu: return z > 0.0 ? 1.0 : kEluAlpha * std::exp(z);
    case Activation::Tanh: {
        const double t = std::tanh(z);
        return 1.0 - t * t;
    }
    }
    return 1.0;
}

double activate_grad2(Activation a, double z) {
    switch (a) {
    case Activation::Identity:
    case Activation::Relu:
    case Activation::LeakyRelu:
        return 0.0;
    case Activation::Elu:
        return z > 0.0 ? 0.0 : kEluAlpha * std::exp(z);
    case Activation::Tanh: {
        const double t = std::tanh(z);
        return -2.0 * t * (1.0 - t * t);
    }
    }
    return 0.0;
}

void MlpGrads::zero() {
    for (auto &m : w)
        std::fill(m.data.begin(), m.data.end(), 0.0);
    for (auto &v : b)
        std::fill(v.begin(), v.end(), 0.0);
}

void MlpGrads::scale(double s) {
    for (auto &m : w)
        for (double &x : m.data)
            x *= s;
    for (auto &v : b)
        for (double &x : v)
            x *= s;
}

void MlpGrads::add(const MlpGrads &other, double s) {
    for (size_t l = 0; l < w.size(); ++l) {
        for (size_t k = 0; k < w[l].data.size(); ++k)
            w[l].data[k] += s * other.w[l].data[k];
        for (size_t k = 0; k < b[l].size(); ++k)
            b[l][k] += s * other.b[l][k];
    }
}

Mlp::Mlp(const std::vector<int> &dims, const std::vector<Activation> &acts, std::mt19937_64 &rng) {
    if (dims.size() < 2)
        throw std::invalid_argument("Mlp: need at least input and output dims");
    if (acts.size() != dims.size() - 1)
        throw std::invalid_argument("Mlp: one activation per layer required");
    layers_.resize(dims.size() - 1);
    for (size_t l = 0; l < layers_.size(); ++l) {
        const int in = dims[l], out = dims[l + 1];
        if (in < 1 || out < 1)
            throw std::invalid_argument("Mlp: layer dims must be >= 1");
        Layer &lay = layers_[l];
        lay.weight = Dense2D(out, in);
        lay.bias.assign(static_cast<size_t>(out), 0.0);
        lay.act = acts[l];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double &wv : lay.weight.data)
            wv = dist(rng);
    }
}

int Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.cols; }
int Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().weight.rows; }

size_t Mlp::num_params() const {
    size_t n = 0;
    for (const auto &l : layers_)
        n += l.weight.data.size() + l.bias.size();
    return n;
}

Layer &Mlp::layer(size_t l) {
    bump_stamp();
    return layers_.at(l);
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
    ForwardCache scratch;
    return forward(x, scratch);
}

std::vector<double> Mlp::forward(std::span<const double> x, ForwardCache &cache) const {
    if (static_cast<int>(x.size()) != input_dim())
        throw std::invalid_argument("Mlp::forward: input has dim " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(input_dim()));
    cache.input.assign(x.begin(), x.end());
    cache.pre.resize(layers_.size());
    cache.post.resize(layers_.size());
    cache.stamp = stamp_;
    const std::vector<double> *h = &cache.input;
    for (size_t l = 0; l < layers_.size(); ++l) {
        const Layer &lay = layers_[l];
        auto &z = cache.pre[l];
        matvec(lay.weight, *h, z);
        for (size_t i = 0; i < z.size(); ++i)
            z[i] += lay.bias[i];
        auto &a = cache.post[l];
        a.resize(z.size());
        for (size_t i = 0; i < z.size(); ++i)
            a[i] = activate(lay.act, z[i]);
        h = &a;
    }
    return cache.post.back();
}

void Mlp::check_cache(const ForwardCache &cache) const {
    if (cache.stamp != stamp_)
        throw std::logic_error("Mlp: stale forward cache (parameters changed since forward)");
    if (cache.pre.size() != layers_.size())
        throw std::logic_error("Mlp: cache does not match this network");
}

std::vector<double> Mlp::backward(const ForwardCache &cache, std::span<const double> dl_dy,
                                  MlpGrads &grads) const {
    check_cache(cache);
    if (static_cast<int>(dl_dy.size()) != output_dim())
        throw std::invalid_argument("Mlp::backward: dl_dy dim mismatch");
    std::vector<double> delta(dl_dy.begin(), dl_dy.end());
    std::vector<double> next;
    for (size_t li = layers_.size(); li-- > 0;) {
        const Layer &lay = layers_[li];
        const auto &z = cache.pre[li];
        for (size_t i = 0; i < delta.size(); ++i)
            delta[i] *= activate_grad(lay.act, z[i]);
        const std::vector<double> &h_in = (li == 0) ? cache.input : cache.post[li - 1];
        add_outer(grads.w[li], delta, h_in);
        for (size_t i = 0; i < delta.size(); ++i)
            grads.b[li][i] += delta[i];
        matvec_transpose(lay.weight, delta, next);
        delta.swap(next);
    }
    return delta;
}

std::vector<double> Mlp::input_gradient(const ForwardCache &cache) const {
    check_cache(cache);
    if (output_dim() != 1)
        throw std::invalid_argument("Mlp::input_gradient: scalar-output nets only");
    std::vector<double> delta{1.0};
    std::vector<double> next;
    for (size_t li = layers_.size(); li-- > 0;) {
        const Layer &lay = layers_[li];
        const auto &z = cache.pre[li];
        for (size_t i = 0; i < delta.size(); ++i)
            delta[i] *= activate_grad(lay.act, z[i]);
        matvec_transpose(lay.weight, delta, next);
        delta.swap(next);
    }
    return delta;
}

double Mlp::input_gradient_param_backward(const ForwardCache &cache, std::span<const double> dir,
                                          MlpGrads &grads) const {
    check_cache(cache);
    if (output_dim() != 1)
        throw std::invalid_argument("Mlp::input_gradient_param_backward: scalar-output nets only");
    if (static_cast<int>(dir.size()) != input_dim())
        throw std::invalid_argument("Mlp::input_gradient_param_backward: dir dim mismatch");
    const size_t depth = layers_.size();
    const std::vector<double> dir_vec(dir.begin(), dir.end());

    // tangent pass: tau_l = W_l t_{l-1}, t_l = act'(z_l) .* tau_l, s = t_L (scalar)
    std::vector<std::vector<double>> tau(depth), t(depth);
    const std::vector<double> *t_prev = &dir_vec;
    for (size_t l = 0; l < depth; ++l) {
        const Layer &lay = layers_[l];
        matvec(lay.weight, *t_prev, tau[l]);
        t[l].resize(tau[l].size());
        for (size_t i = 0; i < tau[l].size(); ++i)
            t[l][i] = activate_grad(lay.act, cache.pre[l][i]) * tau[l][i];
        t_prev = &t[l];
    }
    const double s = t.back()[0];

    // reverse pass for d s / d theta. `ta` is the adjoint of t_l, `ze` of z_l.
    std::vector<double> ta{1.0};
    std::vector<std::vector<double>> ze(depth);
    for (size_t l = 0; l < depth; ++l)
        ze[l].assign(cache.pre[l].size(), 0.0);
    std::vector<double> tmp;
    for (size_t li = depth; li-- > 0;) {
        const Layer &lay = layers_[li];
        const auto &z = cache.pre[li];
        // adjoint of tau_l and the act'(z_l) gate
        std::vector<double> tau_adj(ta.size());
        for (size_t i = 0; i < ta.size(); ++i) {
            tau_adj[i] = activate_grad(lay.act, z[i]) * ta[i];
            ze[li][i] += activate_grad2(lay.act, z[i]) * tau[li][i] * ta[i];
        }
        const std::vector<double> &t_in_v = (li == 0) ? dir_vec : t[li - 1];
        add_outer(grads.w[li], tau_adj, t_in_v);
        matvec_transpose(lay.weight, tau_adj, tmp);
        ta.swap(tmp);
        // push the z_l adjoint into W_l, b_l and the primal activations below
        const std::vector<double> &h_in = (li == 0) ? cache.input : cache.post[li - 1];
        add_outer(grads.w[li], ze[li], h_in);
        for (size_t i = 0; i < ze[li].size(); ++i)
            grads.b[li][i] += ze[li][i];
        if (li > 0) {
            matvec_transpose(lay.weight, ze[li], tmp);
            const auto &z_below = cache.pre[li - 1];
            for (size_t i = 0; i < tmp.size(); ++i)
                ze[li - 1][i] += activate_grad(layers_[li - 1].act, z_below[i]) * tmp[i];
        }
    }
    return s;
}

void Mlp::relu_project_weights() {
    for (auto &lay : layers_)
        for (double &wv : lay.weight.data)
            if (wv < 0.0)
                wv = 0.0;
    bump_stamp();
}

double Mlp::min_weight() const {
    double lo = 0.0;
    bool first = true;
    for (const auto &lay : layers_)
        for (double wv : lay.weight.data) {
            if (first || wv < lo)
                lo = wv;
            first = false;
        }
    return lo;
}

void Mlp::zero_last_layer() {
    if (layers_.empty())
        return;
    auto &lay = layers_.back();
    std::fill(lay.weight.data.begin(), lay.weight.data.end(), 0.0);
    std::fill(lay.bias.begin(), lay.bias.end(), 0.0);
    bump_stamp();
}

MlpGrads Mlp::make_grads() const {
    MlpGrads g;
    g.w.reserve(layers_.size());
    g.b.reserve(layers_.size());
    for (const auto &lay : layers_) {
        g.w.emplace_back(lay.weight.rows, lay.weight.cols);
        g.b.emplace_back(lay.bias.size(), 0.0);
    }
    return g;
}

void Optimizer::attach(Mlp &net) {
    Slot s;
    s.net = &net;
    for (const auto &lay : net.layers()) {
        s.w_m1.emplace_back(lay.weight.rows, lay.weight.cols);
        s.w_m2.emplace_back(lay.weight.rows, lay.weight.cols);
        s.b_m1.emplace_back(lay.bias.size(), 0.0);
        s.b_m2.emplace_back(lay.bias.size(), 0.0);
    }
    slots_.push_back(std::move(s));
}

namespace {

void check_finite(std::span<const double> g, const char *what) {
    for (double v : g)
        if (!std::isfinite(v))
            throw TrainingError(std::string("non-finite gradient in ") + what);
}

} // namespace

void Optimizer::step(const std::vector<const MlpGrads *> &grads) {
    if (grads.size() != slots_.size())
        throw std::invalid_argument("Optimizer::step: grads count mismatch");
    ++steps_;
    const double t = static_cast<double>(steps_);
    for (size_t si = 0; si < slots_.size(); ++si) {
        Slot &slot = slots_[si];
        const MlpGrads &g = *grads[si];
        for (size_t l = 0; l < slot.net->num_layers(); ++l) {
            check_finite(g.w[l].data, "weights");
            check_finite(g.b[l], "bias");
            Layer &lay = slot.net->layer(l);
            auto update = [&](double *param, const double *grad, double *m1, double *m2, size_t count) {
                if (cfg_.kind == OptimizerKind::RmsProp) {
                    for (size_t k = 0; k < count; ++k) {
                        m2[k] = cfg_.rms_decay * m2[k] + (1.0 - cfg_.rms_decay) * grad[k] * grad[k];
                        param[k] -= cfg_.lr * grad[k] / (std::sqrt(m2[k]) + cfg_.rms_eps);
                    }
                } else {
                    const double bc1 = 1.0 - std::pow(cfg_.adam_beta1, t);
                    const double bc2 = 1.0 - std::pow(cfg_.adam_beta2, t);
                    for (size_t k = 0; k < count; ++k) {
                        m1[k] = cfg_.adam_beta1 * m1[k] + (1.0 - cfg_.adam_beta1) * grad[k];
                        m2[k] = cfg_.adam_beta2 * m2[k] + (1.0 - cfg_.adam_beta2) * grad[k] * grad[k];
                        const double mh = m1[k] / bc1;
                        const double vh = m2[k] / bc2;
                        param[k] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.adam_eps);
                    }
                }
            };
            update(lay.weight.data.data(), g.w[l].data.data(), slot.w_m1[l].data.data(),
                   slot.w_m2[l].data.data(), lay.weight.data.size());
            update(lay.bias.data(), g.b[l].data(), slot.b_m1[l].data(), slot.b_m2[l].data(),
                   lay.bias.size());
        }
    }
}

namespace {

std::string hex_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_double(const std::string &s) {
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str())
        throw IoError("checkpoint: bad number '" + s + "'");
    return v;
}

} // namespace

void save_params(const std::string &path,
                 const std::vector<std::pair<std::string, const Mlp *>> &nets) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write checkpoint: " + path);
    out << "lomaq-params v1\n";
    out << "nets " << nets.size() << "\n";
    for (const auto &[name, net] : nets) {
        out << "net " << name << " layers " << net->num_layers() << "\n";
        for (const auto &lay : net->layers()) {
            out << "layer " << lay.weight.cols << " " << lay.weight.rows << " "
                << activation_name(lay.act) << "\n";
            out << "W";
            for (double v : lay.weight.data)
                out << " " << hex_double(v);
            out << "\nb";
            for (double v : lay.bias)
                out << " " << hex_double(v);
            out << "\n";
        }
    }
    if (!out)
        throw IoError("failed writing checkpoint: " + path);
}

std::vector<std::pair<std::string, Mlp>> load_params(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "lomaq-params v1")
        throw IoError("checkpoint: unsupported header");
    std::string tok;
    size_t net_count = 0;
    in >> tok >> net_count;
    if (tok != "nets")
        throw IoError("checkpoint: missing nets count");
    std::vector<std::pair<std::string, Mlp>> out;
    std::mt19937_64 dummy(0);
    for (size_t ni = 0; ni < net_count; ++ni) {
        std::string name;
        size_t layer_count = 0;
        in >> tok >> name;
        if (tok != "net")
            throw IoError("checkpoint: expected net record");
        in >> tok >> layer_count;
        if (tok != "layers")
            throw IoError("checkpoint: expected layer count");
        std::vector<int> dims;
        std::vector<Activation> acts;
        std::vector<std::vector<double>> weights, biases;
        for (size_t li = 0; li < layer_count; ++li) {
            int in_dim = 0, out_dim = 0;
            std::string act_name;
            in >> tok >> in_dim >> out_dim >> act_name;
            if (tok != "layer")
                throw IoError("checkpoint: expected layer record");
            if (li == 0)
                dims.push_back(in_dim);
            dims.push_back(out_dim);
            acts.push_back(activation_from_name(act_name));
            in >> tok;
            if (tok != "W")
                throw IoError("checkpoint: expected weight block");
            std::vector<double> w(static_cast<size_t>(in_dim) * out_dim);
            for (double &v : w) {
                in >> tok;
                v = parse_double(tok);
            }
            in >> tok;
            if (tok != "b")
                throw IoError("checkpoint: expected bias block");
            std::vector<double> b(static_cast<size_t>(out_dim));
            for (double &v : b) {
                in >> tok;
                v = parse_double(tok);
            }
            weights.push_back(std::move(w));
            biases.push_back(std::move(b));
        }
        if (!in)
            throw IoError("checkpoint: truncated file");
        Mlp net(dims, acts, dummy);
        for (size_t li = 0; li < layer_count; ++li) {
            Layer &lay = net.layer(li);
            lay.weight.data = weights[li];
            lay.bias = biases[li];
        }
        out.emplace_back(name, std::move(net));
    }
    return out;
}

} // namespace lomaq
