#include "wuglab/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "wuglab/error.hpp"
#include "wuglab/nn.hpp"
#include "wuglab/rng.hpp"

namespace wuglab {

namespace {

constexpr double kAttnMaskPenalty = -1e9;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    return cdf + x * pdf;
}

}  // namespace

void ModelConfig::validate() const {
    if (vocab_size == 0) {
        throw std::invalid_argument("ModelConfig: vocab_size must be positive");
    }
    if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0) {
        throw std::invalid_argument("ModelConfig: d_model must be divisible by n_heads");
    }
    if (n_layers == 0 || ffn_multiplier == 0 || max_seq_len == 0) {
        throw std::invalid_argument("ModelConfig: zero-sized dimension");
    }
    if (mask_token_id < 0 || mask_token_id >= static_cast<int>(vocab_size) ||
        pad_token_id < 0 || pad_token_id >= static_cast<int>(vocab_size)) {
        throw std::invalid_argument("ModelConfig: special token id out of range");
    }
    if (!(init_std > 0.0)) {
        throw std::invalid_argument("ModelConfig: init_std must be positive");
    }
}

Tensor& Parameters::at(const std::string& name) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) {
        throw std::invalid_argument("Parameters: unknown tensor " + name);
    }
    return it->second;
}

const Tensor& Parameters::at(const std::string& name) const {
    const auto it = tensors.find(name);
    if (it == tensors.end()) {
        throw std::invalid_argument("Parameters: unknown tensor " + name);
    }
    return it->second;
}

std::string layer_param_name(std::size_t layer, const std::string& suffix) {
    return "layer" + std::to_string(layer) + "." + suffix;
}

Parameters init_model(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Parameters params;
    params.config = config;
    Rng rng(mix_seed(seed, 0x696e6974ULL));  // "init"

    const std::size_t v = config.vocab_size;
    const std::size_t d = config.d_model;
    const std::size_t f = config.ffn_dim();

    const auto normal_tensor = [&](std::vector<std::size_t> shape) {
        Tensor t(std::move(shape));
        for (std::size_t i = 0; i < t.size(); ++i) {
            t[i] = rng.normal(0.0, config.init_std);
        }
        return t;
    };
    const auto ones = [](std::vector<std::size_t> shape) {
        Tensor t(std::move(shape));
        t.fill(1.0);
        return t;
    };

    // Sampling order is fixed; do not reorder without breaking seeds.
    params.tensors.emplace("embedding", normal_tensor({v, d}));
    params.tensors.emplace("positional", normal_tensor({config.max_seq_len, d}));
    params.tensors.emplace("emb_ln.gamma", ones({d}));
    params.tensors.emplace("emb_ln.beta", Tensor({d}));
    for (std::size_t l = 0; l < config.n_layers; ++l) {
        const auto name = [&](const char* suffix) { return layer_param_name(l, suffix); };
        params.tensors.emplace(name("attn.wq"), normal_tensor({d, d}));
        params.tensors.emplace(name("attn.bq"), Tensor({d}));
        // No key bias: softmax rows are shift-invariant, so a key bias is
        // inert in the attention output and would carry an identically-zero
        // gradient.
        params.tensors.emplace(name("attn.wk"), normal_tensor({d, d}));
        params.tensors.emplace(name("attn.wv"), normal_tensor({d, d}));
        params.tensors.emplace(name("attn.bv"), Tensor({d}));
        params.tensors.emplace(name("attn.wo"), normal_tensor({d, d}));
        params.tensors.emplace(name("attn.bo"), Tensor({d}));
        params.tensors.emplace(name("ln1.gamma"), ones({d}));
        params.tensors.emplace(name("ln1.beta"), Tensor({d}));
        params.tensors.emplace(name("ffn.w1"), normal_tensor({f, d}));
        params.tensors.emplace(name("ffn.b1"), Tensor({f}));
        params.tensors.emplace(name("ffn.w2"), normal_tensor({d, f}));
        params.tensors.emplace(name("ffn.b2"), Tensor({d}));
        params.tensors.emplace(name("ln2.gamma"), ones({d}));
        params.tensors.emplace(name("ln2.beta"), Tensor({d}));
    }
    params.tensors.emplace("output_bias", Tensor({v}));
    return params;
}

namespace {

// y[t,o] = sum_i W[o,i] x[t,i] + b[o]; bias optional.
void linear_forward(const Tensor& x, const Tensor& weight, const Tensor* bias, Tensor& y) {
    const std::size_t t_len = x.rows();
    const std::size_t in = x.cols();
    const std::size_t out = weight.rows();
    for (std::size_t t = 0; t < t_len; ++t) {
        const double* xt = x.row(t);
        double* yt = y.row(t);
        for (std::size_t o = 0; o < out; ++o) {
            yt[o] = (bias ? (*bias)[o] : 0.0) + dot(weight.row(o), xt, in);
        }
    }
}

// Accumulates dx, dW, and (when present) db for the layer above.
void linear_backward(const Tensor& x, const Tensor& weight, const Tensor& dy, Tensor& dx,
                     Tensor& d_weight, Tensor* d_bias) {
    const std::size_t t_len = x.rows();
    const std::size_t in = x.cols();
    const std::size_t out = weight.rows();
    for (std::size_t t = 0; t < t_len; ++t) {
        const double* xt = x.row(t);
        const double* dyt = dy.row(t);
        double* dxt = dx.row(t);
        for (std::size_t o = 0; o < out; ++o) {
            const double g = dyt[o];
            if (g == 0.0) {
                continue;
            }
            if (d_bias != nullptr) {
                (*d_bias)[o] += g;
            }
            double* dw = d_weight.row(o);
            const double* w = weight.row(o);
            for (std::size_t i = 0; i < in; ++i) {
                dw[i] += g * xt[i];
                dxt[i] += g * w[i];
            }
        }
    }
}

struct LnCache {
    Tensor xhat;                  // T x d
    std::vector<double> inv_std;  // T
};

// y = gamma * (x - mean) * inv_std + beta, per position over d dims.
void layer_norm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                        double epsilon, Tensor& y, LnCache& cache) {
    const std::size_t t_len = x.rows();
    const std::size_t d = x.cols();
    cache.xhat = Tensor({t_len, d});
    cache.inv_std.assign(t_len, 0.0);
    for (std::size_t t = 0; t < t_len; ++t) {
        const double* xt = x.row(t);
        double mean = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            mean += xt[i];
        }
        mean /= double(d);
        double var = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double c = xt[i] - mean;
            var += c * c;
        }
        var /= double(d);
        const double inv_std = 1.0 / std::sqrt(var + epsilon);
        cache.inv_std[t] = inv_std;
        double* xhat = cache.xhat.row(t);
        double* yt = y.row(t);
        for (std::size_t i = 0; i < d; ++i) {
            xhat[i] = (xt[i] - mean) * inv_std;
            yt[i] = gamma[i] * xhat[i] + beta[i];
        }
    }
}

void layer_norm_backward(const LnCache& cache, const Tensor& gamma, const Tensor& dy,
                         Tensor& dx, Tensor& d_gamma, Tensor& d_beta) {
    const std::size_t t_len = cache.xhat.rows();
    const std::size_t d = cache.xhat.cols();
    for (std::size_t t = 0; t < t_len; ++t) {
        const double* dyt = dy.row(t);
        const double* xhat = cache.xhat.row(t);
        double mean_dxhat = 0.0;
        double mean_dxhat_xhat = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double dxhat = dyt[i] * gamma[i];
            d_gamma[i] += dyt[i] * xhat[i];
            d_beta[i] += dyt[i];
            mean_dxhat += dxhat;
            mean_dxhat_xhat += dxhat * xhat[i];
        }
        mean_dxhat /= double(d);
        mean_dxhat_xhat /= double(d);
        const double inv_std = cache.inv_std[t];
        double* dxt = dx.row(t);
        for (std::size_t i = 0; i < d; ++i) {
            const double dxhat = dyt[i] * gamma[i];
            dxt[i] += inv_std * (dxhat - mean_dxhat - xhat[i] * mean_dxhat_xhat);
        }
    }
}

struct LayerCache {
    Tensor x_in;   // layer input (T x d)
    Tensor q, k, v;
    std::vector<Tensor> attn;  // per head, T x T softmax weights
    Tensor ctx;    // concatenated head outputs
    Tensor x_mid;  // post-LN1, FFN input
    Tensor f1;     // pre-GELU
    Tensor g;      // post-GELU
    LnCache ln1, ln2;
};

struct ForwardCache {
    std::size_t t_len = 0;
    Tensor x0;  // embeddings + positional, pre emb-LN
    LnCache ln_emb;
    std::vector<LayerCache> layers;
    Tensor hidden;  // final encoder output (T x d)
    std::vector<double> attn_bias;  // 0 or kAttnMaskPenalty per key position
};

void check_tokens(const ModelConfig& config, std::span<const int> tokens) {
    if (tokens.empty()) {
        throw std::invalid_argument("encoder: empty token sequence");
    }
    if (tokens.size() > config.max_seq_len) {
        throw std::invalid_argument("encoder: sequence longer than max_seq_len");
    }
    for (int id : tokens) {
        if (id < 0 || id >= static_cast<int>(config.vocab_size)) {
            throw std::invalid_argument("encoder: token id out of range");
        }
    }
}

ForwardCache encoder_forward(const Parameters& params, std::span<const int> tokens) {
    const ModelConfig& config = params.config;
    check_tokens(config, tokens);

    const std::size_t t_len = tokens.size();
    const std::size_t d = config.d_model;
    const std::size_t n_heads = config.n_heads;
    const std::size_t head_dim = config.head_dim();
    const std::size_t f = config.ffn_dim();
    const double inv_sqrt_hd = 1.0 / std::sqrt(double(head_dim));

    ForwardCache cache;
    cache.t_len = t_len;
    cache.attn_bias.assign(t_len, 0.0);
    for (std::size_t t = 0; t < t_len; ++t) {
        if (tokens[t] == config.pad_token_id) {
            cache.attn_bias[t] = kAttnMaskPenalty;
        }
    }

    const Tensor& embedding = params.at("embedding");
    const Tensor& positional = params.at("positional");
    cache.x0 = Tensor({t_len, d});
    for (std::size_t t = 0; t < t_len; ++t) {
        const double* emb = embedding.row(static_cast<std::size_t>(tokens[t]));
        const double* pos = positional.row(t);
        double* x = cache.x0.row(t);
        for (std::size_t i = 0; i < d; ++i) {
            x[i] = emb[i] + pos[i];
        }
    }

    Tensor x({t_len, d});
    layer_norm_forward(cache.x0, params.at("emb_ln.gamma"), params.at("emb_ln.beta"),
                       config.ln_epsilon, x, cache.ln_emb);

    cache.layers.resize(config.n_layers);
    for (std::size_t l = 0; l < config.n_layers; ++l) {
        LayerCache& lc = cache.layers[l];
        const auto name = [&](const char* suffix) { return layer_param_name(l, suffix); };
        lc.x_in = x;

        lc.q = Tensor({t_len, d});
        lc.k = Tensor({t_len, d});
        lc.v = Tensor({t_len, d});
        linear_forward(lc.x_in, params.at(name("attn.wq")), &params.at(name("attn.bq")),
                       lc.q);
        linear_forward(lc.x_in, params.at(name("attn.wk")), nullptr, lc.k);
        linear_forward(lc.x_in, params.at(name("attn.wv")), &params.at(name("attn.bv")),
                       lc.v);

        lc.attn.assign(n_heads, Tensor({t_len, t_len}));
        lc.ctx = Tensor({t_len, d});
        for (std::size_t h = 0; h < n_heads; ++h) {
            const std::size_t off = h * head_dim;
            Tensor& attn = lc.attn[h];
            for (std::size_t t = 0; t < t_len; ++t) {
                double* row = attn.row(t);
                double max_score = -std::numeric_limits<double>::infinity();
                for (std::size_t u = 0; u < t_len; ++u) {
                    row[u] = dot(lc.q.row(t) + off, lc.k.row(u) + off, head_dim) *
                                 inv_sqrt_hd +
                             cache.attn_bias[u];
                    max_score = std::max(max_score, row[u]);
                }
                double sum = 0.0;
                for (std::size_t u = 0; u < t_len; ++u) {
                    row[u] = std::exp(row[u] - max_score);
                    sum += row[u];
                }
                for (std::size_t u = 0; u < t_len; ++u) {
                    row[u] /= sum;
                }
                double* ctx = lc.ctx.row(t) + off;
                for (std::size_t u = 0; u < t_len; ++u) {
                    const double w = row[u];
                    if (w == 0.0) {
                        continue;
                    }
                    const double* vu = lc.v.row(u) + off;
                    for (std::size_t j = 0; j < head_dim; ++j) {
                        ctx[j] += w * vu[j];
                    }
                }
            }
        }

        Tensor attn_out({t_len, d});
        linear_forward(lc.ctx, params.at(name("attn.wo")), &params.at(name("attn.bo")),
                       attn_out);
        Tensor r1({t_len, d});
        for (std::size_t i = 0; i < r1.size(); ++i) {
            r1[i] = lc.x_in[i] + attn_out[i];
        }
        lc.x_mid = Tensor({t_len, d});
        layer_norm_forward(r1, params.at(name("ln1.gamma")), params.at(name("ln1.beta")),
                           config.ln_epsilon, lc.x_mid, lc.ln1);

        lc.f1 = Tensor({t_len, f});
        linear_forward(lc.x_mid, params.at(name("ffn.w1")), &params.at(name("ffn.b1")),
                       lc.f1);
        lc.g = Tensor({t_len, f});
        for (std::size_t i = 0; i < lc.f1.size(); ++i) {
            lc.g[i] = gelu(lc.f1[i]);
        }
        Tensor f2({t_len, d});
        linear_forward(lc.g, params.at(name("ffn.w2")), &params.at(name("ffn.b2")), f2);
        Tensor r2({t_len, d});
        for (std::size_t i = 0; i < r2.size(); ++i) {
            r2[i] = lc.x_mid[i] + f2[i];
        }
        x = Tensor({t_len, d});
        layer_norm_forward(r2, params.at(name("ln2.gamma")), params.at(name("ln2.beta")),
                           config.ln_epsilon, x, lc.ln2);
    }
    cache.hidden = x;
    return cache;
}

// Backpropagates d_hidden (gradient at the encoder output) down to every
// parameter, accumulating into grads. tokens are needed for the embedding
// scatter.
void encoder_backward(const Parameters& params, std::span<const int> tokens,
                      const ForwardCache& cache, Tensor d_hidden, Gradients& grads) {
    const ModelConfig& config = params.config;
    const std::size_t t_len = cache.t_len;
    const std::size_t d = config.d_model;
    const std::size_t n_heads = config.n_heads;
    const std::size_t head_dim = config.head_dim();
    const std::size_t f = config.ffn_dim();
    const double inv_sqrt_hd = 1.0 / std::sqrt(double(head_dim));

    Tensor dx = std::move(d_hidden);  // gradient w.r.t. current layer output

    for (std::size_t l = config.n_layers; l-- > 0;) {
        const LayerCache& lc = cache.layers[l];
        const auto name = [&](const char* suffix) { return layer_param_name(l, suffix); };

        // LN2
        Tensor dr2({t_len, d});
        layer_norm_backward(lc.ln2, params.at(name("ln2.gamma")), dx, dr2,
                            grads.accumulate(name("ln2.gamma"), {d}),
                            grads.accumulate(name("ln2.beta"), {d}));

        // r2 = x_mid + f2
        Tensor dx_mid = dr2;  // residual branch
        // FFN second linear
        Tensor dg({t_len, f});
        linear_backward(lc.g, params.at(name("ffn.w2")), dr2, dg,
                        grads.accumulate(name("ffn.w2"), {d, f}),
                        &grads.accumulate(name("ffn.b2"), {d}));
        // GELU
        Tensor df1({t_len, f});
        for (std::size_t i = 0; i < df1.size(); ++i) {
            df1[i] = dg[i] * gelu_grad(lc.f1[i]);
        }
        // FFN first linear
        linear_backward(lc.x_mid, params.at(name("ffn.w1")), df1, dx_mid,
                        grads.accumulate(name("ffn.w1"), {f, d}),
                        &grads.accumulate(name("ffn.b1"), {f}));

        // LN1
        Tensor dr1({t_len, d});
        layer_norm_backward(lc.ln1, params.at(name("ln1.gamma")), dx_mid, dr1,
                            grads.accumulate(name("ln1.gamma"), {d}),
                            grads.accumulate(name("ln1.beta"), {d}));

        // r1 = x_in + attn_out
        Tensor dx_in = dr1;  // residual branch
        Tensor dctx({t_len, d});
        linear_backward(lc.ctx, params.at(name("attn.wo")), dr1, dctx,
                        grads.accumulate(name("attn.wo"), {d, d}),
                        &grads.accumulate(name("attn.bo"), {d}));

        Tensor dq({t_len, d});
        Tensor dk({t_len, d});
        Tensor dv({t_len, d});
        std::vector<double> da(t_len);
        for (std::size_t h = 0; h < n_heads; ++h) {
            const std::size_t off = h * head_dim;
            const Tensor& attn = lc.attn[h];
            for (std::size_t t = 0; t < t_len; ++t) {
                const double* at = attn.row(t);
                const double* dctx_t = dctx.row(t) + off;
                double weighted = 0.0;
                for (std::size_t u = 0; u < t_len; ++u) {
                    da[u] = dot(dctx_t, lc.v.row(u) + off, head_dim);
                    weighted += da[u] * at[u];
                    const double w = at[u];
                    if (w != 0.0) {
                        double* dv_u = dv.row(u) + off;
                        for (std::size_t j = 0; j < head_dim; ++j) {
                            dv_u[j] += w * dctx_t[j];
                        }
                    }
                }
                double* dq_t = dq.row(t) + off;
                for (std::size_t u = 0; u < t_len; ++u) {
                    const double ds = at[u] * (da[u] - weighted) * inv_sqrt_hd;
                    if (ds == 0.0) {
                        continue;
                    }
                    const double* k_u = lc.k.row(u) + off;
                    double* dk_u = dk.row(u) + off;
                    const double* q_t = lc.q.row(t) + off;
                    for (std::size_t j = 0; j < head_dim; ++j) {
                        dq_t[j] += ds * k_u[j];
                        dk_u[j] += ds * q_t[j];
                    }
                }
            }
        }
        linear_backward(lc.x_in, params.at(name("attn.wq")), dq, dx_in,
                        grads.accumulate(name("attn.wq"), {d, d}),
                        &grads.accumulate(name("attn.bq"), {d}));
        linear_backward(lc.x_in, params.at(name("attn.wk")), dk, dx_in,
                        grads.accumulate(name("attn.wk"), {d, d}), nullptr);
        linear_backward(lc.x_in, params.at(name("attn.wv")), dv, dx_in,
                        grads.accumulate(name("attn.wv"), {d, d}),
                        &grads.accumulate(name("attn.bv"), {d}));
        dx = std::move(dx_in);
    }

    // Embedding layer norm
    Tensor dx0({t_len, d});
    layer_norm_backward(cache.ln_emb, params.at("emb_ln.gamma"), dx, dx0,
                        grads.accumulate("emb_ln.gamma", {d}),
                        grads.accumulate("emb_ln.beta", {d}));

    Tensor& d_embedding =
        grads.accumulate("embedding", {config.vocab_size, d});
    Tensor& d_positional =
        grads.accumulate("positional", {config.max_seq_len, d});
    for (std::size_t t = 0; t < t_len; ++t) {
        const double* src = dx0.row(t);
        double* demb = d_embedding.row(static_cast<std::size_t>(tokens[t]));
        double* dpos = d_positional.row(t);
        for (std::size_t i = 0; i < d; ++i) {
            demb[i] += src[i];
            dpos[i] += src[i];
        }
    }
}

// Summed loss over (position, target) pairs of one sentence; gradient
// accumulation is optional.
double sentence_loss_and_grads(const Parameters& params, std::span<const int> tokens,
                               std::span<const std::pair<std::size_t, int>> targets,
                               Gradients* grads) {
    const ModelConfig& config = params.config;
    const std::size_t d = config.d_model;
    const std::size_t v = config.vocab_size;
    const Tensor& embedding = params.at("embedding");
    const Tensor& output_bias = params.at("output_bias");

    const ForwardCache cache = encoder_forward(params, tokens);

    double loss = 0.0;
    Tensor d_hidden({cache.t_len, d});
    for (const auto& [position, target] : targets) {
        if (position >= cache.t_len) {
            throw std::invalid_argument("loss: mask position out of range");
        }
        if (tokens[position] != config.mask_token_id) {
            throw std::invalid_argument("loss: mask position does not hold the mask token");
        }
        const double* h = cache.hidden.row(position);
        Tensor logits({v});
        for (std::size_t i = 0; i < v; ++i) {
            logits[i] = dot(embedding.row(i), h, d) + output_bias[i];
        }
        auto [item_loss, d_logits] =
            softmax_cross_entropy(logits, static_cast<std::size_t>(target));
        loss += item_loss;
        if (grads == nullptr) {
            continue;
        }
        Tensor& d_embedding = grads->accumulate("embedding", {v, d});
        Tensor& d_output_bias = grads->accumulate("output_bias", {v});
        double* dh = d_hidden.row(position);
        for (std::size_t i = 0; i < v; ++i) {
            const double g = d_logits[i];
            d_output_bias[i] += g;
            if (g == 0.0) {
                continue;
            }
            const double* e = embedding.row(i);
            double* de = d_embedding.row(i);
            for (std::size_t j = 0; j < d; ++j) {
                de[j] += g * h[j];
                dh[j] += g * e[j];
            }
        }
    }
    if (grads != nullptr) {
        encoder_backward(params, tokens, cache, std::move(d_hidden), *grads);
    }
    return loss;
}

LossGrads batch_loss_and_grads(const Parameters& params, const std::vector<Stimulus>& batch,
                               bool normalize) {
    if (batch.empty()) {
        throw std::invalid_argument("loss_and_grads: empty batch");
    }
    LossGrads result{0.0, {}};
    for (const Stimulus& s : batch) {
        const std::pair<std::size_t, int> target{s.mask_position, s.target};
        result.loss +=
            sentence_loss_and_grads(params, s.tokens, {&target, 1}, &result.grads);
    }
    if (normalize) {
        const double inv = 1.0 / double(batch.size());
        result.loss *= inv;
        result.grads.scale(inv);
    }
    return result;
}

}  // namespace

Tensor mlm_logits(const Parameters& params, std::span<const int> tokens,
                  std::size_t mask_position) {
    const ModelConfig& config = params.config;
    if (mask_position >= tokens.size() ||
        tokens[mask_position] != config.mask_token_id) {
        throw std::invalid_argument("mlm_logits: mask_position must hold the mask token");
    }
    const ForwardCache cache = encoder_forward(params, tokens);
    const Tensor& embedding = params.at("embedding");
    const Tensor& output_bias = params.at("output_bias");
    const double* h = cache.hidden.row(mask_position);
    Tensor logits({config.vocab_size});
    for (std::size_t i = 0; i < config.vocab_size; ++i) {
        logits[i] = dot(embedding.row(i), h, config.d_model) + output_bias[i];
    }
    return logits;
}

Tensor encoder_hidden_states(const Parameters& params, std::span<const int> tokens) {
    return encoder_forward(params, tokens).hidden;
}

LossGrads loss_and_grads(const Parameters& params, const std::vector<Stimulus>& batch) {
    return batch_loss_and_grads(params, batch, true);
}

LossGrads summed_loss_and_grads(const Parameters& params,
                                const std::vector<Stimulus>& batch) {
    return batch_loss_and_grads(params, batch, false);
}

namespace {

struct MaskedSentence {
    std::vector<int> tokens;
    std::vector<std::pair<std::size_t, int>> targets;
};

}  // namespace

TrainReport train_base(Parameters& params, const std::vector<std::vector<int>>& corpus,
                       const TrainHyper& hyper, std::uint64_t seed, const Vocab& vocab,
                       const std::vector<Stimulus>& heldout) {
    if (corpus.empty()) {
        throw std::invalid_argument("train_base: empty corpus");
    }
    const auto start = std::chrono::steady_clock::now();
    const std::size_t threads = std::max<std::size_t>(1, hyper.threads);

    OptimizerState opt = hyper.kind == OptimizerKind::Adam
                             ? OptimizerState::adam(hyper.learning_rate)
                             : OptimizerState::sgd(hyper.learning_rate);
    const auto all_trainable = [](const std::string&) { return true; };

    TrainReport report;
    Rng rng(mix_seed(seed, 0x62617365ULL));  // "base"
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss_sum = 0.0;
        std::size_t epoch_targets = 0;

        std::vector<MaskedSentence> batch;
        batch.reserve(hyper.batch_size);
        const auto flush = [&]() {
            if (batch.empty()) {
                return;
            }
            // Per-sentence gradient buffers reduced in batch order: the
            // arithmetic is identical for any thread count.
            std::vector<Gradients> per_sentence(batch.size());
            std::vector<double> per_loss(batch.size(), 0.0);
            const auto work = [&](std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i) {
                    per_loss[i] = sentence_loss_and_grads(params, batch[i].tokens,
                                                          batch[i].targets,
                                                          &per_sentence[i]);
                }
            };
            if (threads == 1 || batch.size() == 1) {
                work(0, batch.size());
            } else {
                const std::size_t n_chunks = std::min(threads, batch.size());
                std::vector<std::future<void>> futures;
                for (std::size_t c = 0; c < n_chunks; ++c) {
                    const std::size_t begin = c * batch.size() / n_chunks;
                    const std::size_t end = (c + 1) * batch.size() / n_chunks;
                    futures.push_back(std::async(std::launch::async,
                                                 [&work, begin, end] { work(begin, end); }));
                }
                for (auto& fut : futures) {
                    fut.get();
                }
            }

            Gradients total;
            double loss_sum = 0.0;
            std::size_t n_targets = 0;
            for (std::size_t i = 0; i < batch.size(); ++i) {
                total.add_scaled(per_sentence[i], 1.0);
                loss_sum += per_loss[i];
                n_targets += batch[i].targets.size();
            }
            if (!std::isfinite(loss_sum)) {
                throw DivergenceError("train_base: non-finite loss at epoch " +
                                      std::to_string(epoch));
            }
            total.scale(1.0 / double(n_targets));
            optimizer_step(params.tensors, total, opt, all_trainable);
            epoch_loss_sum += loss_sum;
            epoch_targets += n_targets;
            batch.clear();
        };

        for (std::size_t idx : order) {
            const std::vector<int>& sentence = corpus[idx];
            MaskedSentence masked;
            for (std::size_t p = 0; p < sentence.size(); ++p) {
                if (vocab.is_content(sentence[p]) && rng.bernoulli(hyper.mask_prob)) {
                    masked.targets.emplace_back(p, sentence[p]);
                }
            }
            if (masked.targets.empty()) {
                continue;
            }
            masked.tokens = sentence;
            for (const auto& position_target : masked.targets) {
                masked.tokens[position_target.first] = params.config.mask_token_id;
            }
            batch.push_back(std::move(masked));
            if (batch.size() >= hyper.batch_size) {
                flush();
            }
        }
        flush();
        report.epoch_mean_loss.push_back(
            epoch_targets == 0 ? 0.0 : epoch_loss_sum / double(epoch_targets));
    }

    report.heldout_accuracy =
        heldout.empty() ? 0.0 : masked_accuracy(params, heldout, vocab);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

double masked_accuracy(const Parameters& params, const std::vector<Stimulus>& heldout,
                       const Vocab& vocab) {
    if (heldout.empty()) {
        throw std::invalid_argument("masked_accuracy: empty held-out set");
    }
    std::size_t correct = 0;
    for (const Stimulus& s : heldout) {
        const Tensor logits = mlm_logits(params, s.tokens, s.mask_position);
        std::size_t argmax = 0;
        for (std::size_t i = 1; i < logits.size(); ++i) {
            if (logits[i] > logits[argmax]) {
                argmax = i;
            }
        }
        const auto category = vocab.category_of_id(static_cast<int>(argmax));
        if (category && *category == s.category) {
            ++correct;
        }
    }
    return double(correct) / double(heldout.size());
}

}  // namespace wuglab
