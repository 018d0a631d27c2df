#include "mimic/neural.hpp"
#include "mimic/rng.hpp"

#include <functional>
#include <stdexcept>

namespace mimic {

namespace {

double sigmoid_stable(double a) {
    if (a >= 0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

double softplus(double a) { return a > 30 ? a : std::log1p(std::exp(a)); }

Eigen::MatrixXd apply_act(const Eigen::MatrixXd& Z, Activation a) {
    switch (a) {
    case Activation::sigmoid: return Z.unaryExpr([](double v) { return sigmoid_stable(v); });
    case Activation::tanh_act: return Z.array().tanh().matrix();
    case Activation::relu: return Z.cwiseMax(0.0);
    default: return Z;
    }
}

// derivative expressed through the activation outputs
Eigen::MatrixXd act_deriv(const Eigen::MatrixXd& A, Activation a) {
    switch (a) {
    case Activation::sigmoid: return (A.array() * (1.0 - A.array())).matrix();
    case Activation::tanh_act: return (1.0 - A.array().square()).matrix();
    case Activation::relu:
        return A.unaryExpr([](double v) { return v > 0 ? 1.0 : 0.0; });
    default: return Eigen::MatrixXd::Ones(A.rows(), A.cols());
    }
}

LayerParams init_layer(Eigen::Index fan_out, Eigen::Index fan_in, Activation act,
                       std::mt19937_64& rng) {
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-r, r);
    LayerParams l;
    l.W.resize(fan_out, fan_in);
    for (Eigen::Index j = 0; j < fan_in; ++j)
        for (Eigen::Index i = 0; i < fan_out; ++i) l.W(i, j) = u(rng);
    l.b = Eigen::VectorXd::Zero(fan_out);
    l.act = act;
    return l;
}

// Prediction heads start at zero: scores open at 0.5 and the direction learned
// under the short fixed budget is not masked by random init noise.
LayerParams zero_head(Eigen::Index fan_in) {
    LayerParams l;
    l.W = Eigen::MatrixXd::Zero(1, fan_in);
    l.b = Eigen::VectorXd::Zero(1);
    l.act = Activation::sigmoid;
    return l;
}

// samples as columns
Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& X, const std::vector<int>& idx,
                            std::size_t begin, std::size_t end) {
    Eigen::MatrixXd out(X.cols(), static_cast<Eigen::Index>(end - begin));
    for (std::size_t k = begin; k < end; ++k)
        out.col(static_cast<Eigen::Index>(k - begin)) = X.row(idx[k]).transpose();
    return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& y, const std::vector<int>& idx, std::size_t begin,
                       std::size_t end) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(end - begin));
    for (std::size_t k = begin; k < end; ++k) out(static_cast<Eigen::Index>(k - begin)) = y(idx[k]);
    return out;
}

// mean BCE via the softplus form; delta = dL/da
double bce_and_delta(const Eigen::RowVectorXd& a, const Eigen::VectorXd& y,
                     Eigen::RowVectorXd& delta) {
    const auto nb = a.size();
    delta.resize(nb);
    double loss = 0;
    for (Eigen::Index i = 0; i < nb; ++i) {
        loss += softplus(a(i)) - y(i) * a(i);
        delta(i) = (sigmoid_stable(a(i)) - y(i)) / static_cast<double>(nb);
    }
    return loss / static_cast<double>(nb);
}

Eigen::VectorXd clamp_probs(Eigen::RowVectorXd a) {
    Eigen::VectorXd out(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out(i) = std::min(1.0 - 1e-15, std::max(1e-15, sigmoid_stable(a(i))));
    return out;
}

struct View {
    double* p;
    Eigen::Index n;
};

void add_views(std::vector<View>& v, LayerParams& l) {
    v.push_back({l.W.data(), l.W.size()});
    v.push_back({l.b.data(), l.b.size()});
}

std::vector<View> views_of(MlpModel& m) {
    std::vector<View> v;
    for (auto& l : m.layers) add_views(v, l);
    add_views(v, m.head);
    return v;
}

std::vector<View> views_of(LstmModel& m) {
    std::vector<View> v;
    for (auto* w : {&m.W_fh, &m.W_ih, &m.W_ch, &m.W_oh, &m.W_fx, &m.W_ix, &m.W_cx, &m.W_ox})
        v.push_back({w->data(), w->size()});
    for (auto* b : {&m.b_f, &m.b_i, &m.b_c, &m.b_o}) v.push_back({b->data(), b->size()});
    add_views(v, m.head);
    return v;
}

void zero_like_inplace(std::vector<View>& v) {
    for (auto& x : v) std::fill(x.p, x.p + x.n, 0.0);
}

void apply_update(const std::vector<View>& params, const std::vector<View>& grads,
                  std::vector<View>* caches, const TrainConfig& cfg) {
    for (std::size_t k = 0; k < params.size(); ++k) {
        double* p = params[k].p;
        const double* g = grads[k].p;
        if (cfg.optimizer == Optimizer::rmsprop) {
            double* c = (*caches)[k].p;
            for (Eigen::Index i = 0; i < params[k].n; ++i)
                rmsprop_step(p[i], g[i], c[i], cfg.learning_rate);
        } else {
            for (Eigen::Index i = 0; i < params[k].n; ++i) p[i] -= cfg.learning_rate * g[i];
        }
    }
}

double max_rel_err(const std::vector<View>& params, const std::vector<View>& grads,
                   const std::function<double()>& loss, double eps) {
    double worst = 0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        for (Eigen::Index i = 0; i < params[k].n; ++i) {
            double& p = params[k].p[i];
            const double saved = p;
            p = saved + eps;
            const double lp = loss();
            p = saved - eps;
            const double lm = loss();
            p = saved;
            const double numeric = (lp - lm) / (2.0 * eps);
            const double analytic = grads[k].p[i];
            const double err =
                std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

// ---- MLP -----------------------------------------------------------------

double mlp_loss_grad(const MlpModel& m, const Eigen::MatrixXd& Xb, const Eigen::VectorXd& yb,
                     MlpModel* g) {
    std::vector<Eigen::MatrixXd> acts;
    acts.push_back(Xb);
    for (const auto& l : m.layers)
        acts.push_back(apply_act((l.W * acts.back()).colwise() + l.b, l.act));
    Eigen::RowVectorXd a = (m.head.W * acts.back()).row(0);
    a.array() += m.head.b(0);

    Eigen::RowVectorXd delta;
    const double loss = bce_and_delta(a, yb, delta);
    if (!g) return loss;

    g->head.W = delta * acts.back().transpose();
    g->head.b(0) = delta.sum();
    Eigen::MatrixXd dA = m.head.W.transpose() * delta;
    for (int l = static_cast<int>(m.layers.size()) - 1; l >= 0; --l) {
        const auto lu = static_cast<std::size_t>(l);
        const Eigen::MatrixXd dZ =
            dA.cwiseProduct(act_deriv(acts[lu + 1], m.layers[lu].act));
        g->layers[lu].W = dZ * acts[lu].transpose();
        g->layers[lu].b = dZ.rowwise().sum();
        if (l > 0) dA = m.layers[lu].W.transpose() * dZ;
    }
    return loss;
}

MlpModel mlp_zeros_like(const MlpModel& m) {
    MlpModel z = m;
    for (auto& l : z.layers) {
        l.W.setZero();
        l.b.setZero();
    }
    z.head.W.setZero();
    z.head.b.setZero();
    return z;
}

// ---- tied-weight denoising autoencoder layer -------------------------------

struct DaeGrads {
    Eigen::MatrixXd W;
    Eigen::VectorXd b, b_d;
};

double dae_loss_grad(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, Activation enc_act,
                     const Eigen::VectorXd& b_d, Activation dec_act,
                     const Eigen::MatrixXd& Hclean, const Eigen::MatrixXd& Hcorrupt,
                     DaeGrads* g) {
    const double nb = static_cast<double>(Hclean.cols());
    const Eigen::MatrixXd Z = apply_act((W * Hcorrupt).colwise() + b, enc_act);
    const Eigen::MatrixXd R = apply_act((W.transpose() * Z).colwise() + b_d, dec_act);
    const Eigen::MatrixXd diff = R - Hclean;
    const double loss = diff.squaredNorm() / nb;
    if (!g) return loss;

    // tied weights: the shared matrix collects the encoder- and decoder-path
    // contributions
    const Eigen::MatrixXd ddec = (2.0 / nb) * diff.cwiseProduct(act_deriv(R, dec_act));
    const Eigen::MatrixXd dz = (W * ddec).cwiseProduct(act_deriv(Z, enc_act));
    g->W = dz * Hcorrupt.transpose() + Z * ddec.transpose();
    g->b = dz.rowwise().sum();
    g->b_d = ddec.rowwise().sum();
    return loss;
}

Eigen::MatrixXd encoder_forward(const std::vector<LayerParams>& encoder,
                                const Eigen::MatrixXd& A0) {
    Eigen::MatrixXd a = A0;
    for (const auto& l : encoder) a = apply_act((l.W * a).colwise() + l.b, l.act);
    return a;
}

// fine-tuning path: identical wiring to the MLP
double sda_finetune_loss_grad(const SdaModel& m, const Eigen::MatrixXd& Xb,
                              const Eigen::VectorXd& yb, MlpModel* g) {
    MlpModel view;
    view.layers = m.encoder;
    view.head = m.head;
    return mlp_loss_grad(view, Xb, yb, g);
}

// ---- LSTM ------------------------------------------------------------------

LstmModel lstm_zeros_like(const LstmModel& m) {
    LstmModel z = m;
    for (auto* w : {&z.W_fh, &z.W_ih, &z.W_ch, &z.W_oh, &z.W_fx, &z.W_ix, &z.W_cx, &z.W_ox})
        w->setZero();
    for (auto* b : {&z.b_f, &z.b_i, &z.b_c, &z.b_o}) b->setZero();
    z.head.W.setZero();
    z.head.b.setZero();
    return z;
}

struct LstmFwd {
    std::vector<Eigen::MatrixXd> F, I, Ctil, O, C, TanhC, H; // each H x B per step
    Eigen::MatrixXd flat;                                    // (T*H) x B
};

LstmFwd lstm_forward(const LstmModel& m, const std::vector<Eigen::MatrixXd>& Xt) {
    const int T = m.t_steps, H = m.hidden;
    const auto B = Xt.empty() ? 0 : Xt[0].cols();
    LstmFwd fw;
    fw.flat.resize(static_cast<Eigen::Index>(T) * H, B);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(H, B);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(H, B);
    for (int t = 0; t < T; ++t) {
        const auto& x = Xt[static_cast<std::size_t>(t)];
        Eigen::MatrixXd F = apply_act((m.W_fh * h + m.W_fx * x).colwise() + m.b_f, Activation::sigmoid);
        Eigen::MatrixXd I = apply_act((m.W_ih * h + m.W_ix * x).colwise() + m.b_i, Activation::sigmoid);
        Eigen::MatrixXd Ct = apply_act((m.W_ch * h + m.W_cx * x).colwise() + m.b_c, Activation::tanh_act);
        Eigen::MatrixXd O = apply_act((m.W_oh * h + m.W_ox * x).colwise() + m.b_o, Activation::sigmoid);
        c = F.cwiseProduct(c) + I.cwiseProduct(Ct);
        Eigen::MatrixXd tc = c.array().tanh().matrix();
        h = O.cwiseProduct(tc);
        fw.flat.middleRows(static_cast<Eigen::Index>(t) * H, H) = h;
        fw.F.push_back(std::move(F));
        fw.I.push_back(std::move(I));
        fw.Ctil.push_back(std::move(Ct));
        fw.O.push_back(std::move(O));
        fw.C.push_back(c);
        fw.TanhC.push_back(std::move(tc));
        fw.H.push_back(h);
    }
    return fw;
}

double lstm_loss_grad(const LstmModel& m, const std::vector<Eigen::MatrixXd>& Xt,
                      const Eigen::VectorXd& yb, LstmModel* g) {
    const int T = m.t_steps, H = m.hidden;
    const LstmFwd fw = lstm_forward(m, Xt);
    Eigen::RowVectorXd a = (m.head.W * fw.flat).row(0);
    a.array() += m.head.b(0);
    Eigen::RowVectorXd delta;
    const double loss = bce_and_delta(a, yb, delta);
    if (!g) return loss;

    g->head.W = delta * fw.flat.transpose();
    g->head.b(0) = delta.sum();
    const Eigen::MatrixXd dflat = m.head.W.transpose() * delta; // (T*H) x B

    const auto B = fw.flat.cols();
    Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(H, B);
    Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(H, B);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(H, B);
    for (int t = T - 1; t >= 0; --t) {
        const auto tu = static_cast<std::size_t>(t);
        const Eigen::MatrixXd& h_prev = t > 0 ? fw.H[tu - 1] : zero;
        const Eigen::MatrixXd& c_prev = t > 0 ? fw.C[tu - 1] : zero;
        const Eigen::MatrixXd dh = dflat.middleRows(static_cast<Eigen::Index>(t) * H, H) + dh_next;
        const Eigen::MatrixXd dO = dh.cwiseProduct(fw.TanhC[tu]);
        const Eigen::MatrixXd dC =
            dh.cwiseProduct(fw.O[tu]).cwiseProduct(
                (1.0 - fw.TanhC[tu].array().square()).matrix()) +
            dc_next;
        const Eigen::MatrixXd dF = dC.cwiseProduct(c_prev);
        const Eigen::MatrixXd dI = dC.cwiseProduct(fw.Ctil[tu]);
        const Eigen::MatrixXd dCt = dC.cwiseProduct(fw.I[tu]);

        const Eigen::MatrixXd aF = dF.cwiseProduct(act_deriv(fw.F[tu], Activation::sigmoid));
        const Eigen::MatrixXd aI = dI.cwiseProduct(act_deriv(fw.I[tu], Activation::sigmoid));
        const Eigen::MatrixXd aC = dCt.cwiseProduct(act_deriv(fw.Ctil[tu], Activation::tanh_act));
        const Eigen::MatrixXd aO = dO.cwiseProduct(act_deriv(fw.O[tu], Activation::sigmoid));

        const auto& x = Xt[tu];
        g->W_fh += aF * h_prev.transpose();
        g->W_ih += aI * h_prev.transpose();
        g->W_ch += aC * h_prev.transpose();
        g->W_oh += aO * h_prev.transpose();
        g->W_fx += aF * x.transpose();
        g->W_ix += aI * x.transpose();
        g->W_cx += aC * x.transpose();
        g->W_ox += aO * x.transpose();
        g->b_f += aF.rowwise().sum();
        g->b_i += aI.rowwise().sum();
        g->b_c += aC.rowwise().sum();
        g->b_o += aO.rowwise().sum();

        dh_next = m.W_fh.transpose() * aF + m.W_ih.transpose() * aI + m.W_ch.transpose() * aC +
                  m.W_oh.transpose() * aO;
        dc_next = dC.cwiseProduct(fw.F[tu]);
    }
    return loss;
}

// temporal rows (var*T+day layout) -> per-step P x B matrices
std::vector<Eigen::MatrixXd> make_steps(const Eigen::MatrixXd& X_ts, int p, int t,
                                        const std::vector<int>& idx, std::size_t begin,
                                        std::size_t end) {
    std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(t));
    const auto B = static_cast<Eigen::Index>(end - begin);
    for (int step = 0; step < t; ++step) {
        auto& m = out[static_cast<std::size_t>(step)];
        m.resize(p, B);
        for (std::size_t k = begin; k < end; ++k)
            for (int v = 0; v < p; ++v)
                m(v, static_cast<Eigen::Index>(k - begin)) = X_ts(idx[k], v * t + step);
    }
    return out;
}

std::vector<int> all_indices(Eigen::Index n) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = static_cast<int>(i);
    return idx;
}

void check_training_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const char* who) {
    if (X.rows() == 0) throw std::invalid_argument(std::string(who) + ": empty dataset");
    if (X.rows() != y.size()) throw std::invalid_argument(std::string(who) + ": X/y size mismatch");
    if (!X.allFinite() || !y.allFinite())
        throw std::invalid_argument(std::string(who) + ": non-finite input");
}

void check_loss_finite(double loss, int epoch, const char* who) {
    if (!std::isfinite(loss))
        throw std::runtime_error(std::string(who) + ": non-finite loss at epoch " +
                                 std::to_string(epoch));
}

} // namespace

std::string to_string(Activation a) {
    switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh_act: return "tanh";
    case Activation::relu: return "relu";
    default: return "identity";
    }
}

Activation activation_from_string(const std::string& s) {
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "tanh") return Activation::tanh_act;
    if (s == "relu") return Activation::relu;
    if (s == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation '" + s + "'");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (learning_rate <= 0) throw std::invalid_argument("learning_rate must be > 0");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (hidden_multiplier < 1) throw std::invalid_argument("hidden_multiplier must be >= 1");
    if (noise_rate < 0 || noise_rate >= 1) throw std::invalid_argument("noise_rate must be in [0,1)");
    if (hidden_size != -1 && hidden_size < 1)
        throw std::invalid_argument("hidden_size must be -1 or >= 1");
}

double dae_loss(const LayerParams& encoder, const Eigen::VectorXd& decoder_bias,
                Activation decoder_act, const Eigen::MatrixXd& clean,
                const Eigen::MatrixXd& corrupted, Eigen::MatrixXd* grad_w,
                Eigen::VectorXd* grad_b, Eigen::VectorXd* grad_bd) {
    if (!grad_w) {
        return dae_loss_grad(encoder.W, encoder.b, encoder.act, decoder_bias, decoder_act, clean,
                             corrupted, nullptr);
    }
    DaeGrads g{Eigen::MatrixXd::Zero(encoder.W.rows(), encoder.W.cols()),
               Eigen::VectorXd::Zero(encoder.b.size()), Eigen::VectorXd::Zero(decoder_bias.size())};
    const double loss = dae_loss_grad(encoder.W, encoder.b, encoder.act, decoder_bias, decoder_act,
                                      clean, corrupted, &g);
    *grad_w = std::move(g.W);
    if (grad_b) *grad_b = std::move(g.b);
    if (grad_bd) *grad_bd = std::move(g.b_d);
    return loss;
}

Eigen::MatrixXd corrupt(const Eigen::MatrixXd& X, double rate, std::mt19937_64& rng) {
    if (rate < 0 || rate > 1) throw std::invalid_argument("corrupt: rate must be in [0,1]");
    Eigen::MatrixXd out = X;
    if (rate == 0) return out;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index j = 0; j < out.cols(); ++j)
        for (Eigen::Index i = 0; i < out.rows(); ++i)
            if (rate >= 1.0 || u(rng) < rate) out(i, j) = 0.0;
    return out;
}

MlpModel train_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TrainConfig& cfg) {
    cfg.validate();
    check_training_inputs(X, y, "train_mlp");
    auto rng = make_rng(derive_seed(cfg.seed, {hash64("mlp")}));

    const Eigen::Index d = X.cols();
    const Eigen::Index h = d * cfg.hidden_multiplier;
    MlpModel m;
    m.layers.push_back(init_layer(h, d, cfg.hidden_activation, rng));
    m.layers.push_back(init_layer(h, h, cfg.hidden_activation, rng));
    m.head = zero_head(h);

    MlpModel grads = mlp_zeros_like(m);
    MlpModel cache = mlp_zeros_like(m);
    auto pv = views_of(m);
    auto gv = views_of(grads);
    auto cv = views_of(cache);

    auto idx = all_indices(X.rows());
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t start = 0; start < idx.size(); start += bs) {
            const std::size_t end = std::min(start + bs, idx.size());
            const Eigen::MatrixXd Xb = gather_cols(X, idx, start, end);
            const Eigen::VectorXd yb = gather(y, idx, start, end);
            const double loss = mlp_loss_grad(m, Xb, yb, &grads);
            check_loss_finite(loss, epoch, "train_mlp");
            apply_update(pv, gv, &cv, cfg);
        }
    }
    return m;
}

SdaModel train_sda(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TrainConfig& cfg) {
    cfg.validate();
    check_training_inputs(X, y, "train_sda");
    auto rng = make_rng(derive_seed(cfg.seed, {hash64("sda")}));

    const Eigen::Index d = X.cols();
    const Eigen::Index h = d * cfg.hidden_multiplier;
    SdaModel m;
    m.noise_rate = cfg.noise_rate;
    m.encoder.push_back(init_layer(h, d, cfg.hidden_activation, rng));
    m.encoder.push_back(init_layer(h, h, cfg.hidden_activation, rng));
    m.decoder_biases.push_back(Eigen::VectorXd::Zero(d));
    m.decoder_biases.push_back(Eigen::VectorXd::Zero(h));

    // phase 1: greedy layerwise denoising pretraining
    auto idx = all_indices(X.rows());
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    Eigen::MatrixXd Hclean = X.transpose(); // features x N
    for (std::size_t l = 0; l < m.encoder.size(); ++l) {
        auto& enc = m.encoder[l];
        auto& b_d = m.decoder_biases[l];
        const Activation dec_act = l == 0 ? Activation::identity : cfg.hidden_activation;
        DaeGrads g{Eigen::MatrixXd::Zero(enc.W.rows(), enc.W.cols()),
                   Eigen::VectorXd::Zero(enc.b.size()), Eigen::VectorXd::Zero(b_d.size())};
        DaeGrads cache = g;
        std::vector<View> pv{{enc.W.data(), enc.W.size()}, {enc.b.data(), enc.b.size()},
                             {b_d.data(), b_d.size()}};
        std::vector<View> gv{{g.W.data(), g.W.size()}, {g.b.data(), g.b.size()},
                             {g.b_d.data(), g.b_d.size()}};
        std::vector<View> cv{{cache.W.data(), cache.W.size()}, {cache.b.data(), cache.b.size()},
                             {cache.b_d.data(), cache.b_d.size()}};
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            std::shuffle(idx.begin(), idx.end(), rng);
            for (std::size_t start = 0; start < idx.size(); start += bs) {
                const std::size_t end = std::min(start + bs, idx.size());
                Eigen::MatrixXd Hb(Hclean.rows(), static_cast<Eigen::Index>(end - start));
                for (std::size_t k = start; k < end; ++k)
                    Hb.col(static_cast<Eigen::Index>(k - start)) = Hclean.col(idx[k]);
                const Eigen::MatrixXd Hcor = corrupt(Hb, cfg.noise_rate, rng);
                const double loss = dae_loss_grad(enc.W, enc.b, enc.act, b_d, dec_act, Hb, Hcor, &g);
                check_loss_finite(loss, epoch, "train_sda(pretrain)");
                apply_update(pv, gv, &cv, cfg);
            }
        }
        Hclean = apply_act((enc.W * Hclean).colwise() + enc.b, enc.act);
    }

    // phase 2: attach the prediction head and fine-tune encoder + head
    m.head = zero_head(h);
    MlpModel view;
    view.layers = m.encoder;
    view.head = m.head;
    MlpModel grads = mlp_zeros_like(view);
    MlpModel cache = mlp_zeros_like(view);
    auto pv = views_of(view);
    auto gv = views_of(grads);
    auto cv = views_of(cache);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t start = 0; start < idx.size(); start += bs) {
            const std::size_t end = std::min(start + bs, idx.size());
            const Eigen::MatrixXd Xb = gather_cols(X, idx, start, end);
            const Eigen::VectorXd yb = gather(y, idx, start, end);
            const double loss = mlp_loss_grad(view, Xb, yb, &grads);
            check_loss_finite(loss, epoch, "train_sda(finetune)");
            apply_update(pv, gv, &cv, cfg);
        }
    }
    m.encoder = view.layers;
    m.head = view.head;
    return m;
}

LstmModel train_lstm(const Eigen::MatrixXd& X_ts, int p, int t, const Eigen::VectorXd& y,
                     const TrainConfig& cfg) {
    cfg.validate();
    check_training_inputs(X_ts, y, "train_lstm");
    if (t < 1) throw std::invalid_argument("train_lstm: t_steps must be >= 1");
    if (X_ts.cols() != static_cast<Eigen::Index>(p) * t)
        throw std::invalid_argument("train_lstm: X_ts columns must equal p*t");
    auto rng = make_rng(derive_seed(cfg.seed, {hash64("lstm")}));

    const int H = cfg.hidden_size > 0 ? cfg.hidden_size : 2 * p;
    LstmModel m;
    m.hidden = H;
    m.n_inputs = p;
    m.t_steps = t;
    for (auto* w : {&m.W_fh, &m.W_ih, &m.W_ch, &m.W_oh}) {
        *w = init_layer(H, H, Activation::identity, rng).W;
    }
    for (auto* w : {&m.W_fx, &m.W_ix, &m.W_cx, &m.W_ox}) {
        *w = init_layer(H, p, Activation::identity, rng).W;
    }
    for (auto* b : {&m.b_f, &m.b_i, &m.b_c, &m.b_o}) *b = Eigen::VectorXd::Zero(H);
    m.head = zero_head(static_cast<Eigen::Index>(t) * H);

    LstmModel grads = lstm_zeros_like(m);
    LstmModel cache = lstm_zeros_like(m);
    auto pv = views_of(m);
    auto gv = views_of(grads);
    auto cv = views_of(cache);

    auto idx = all_indices(X_ts.rows());
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t start = 0; start < idx.size(); start += bs) {
            const std::size_t end = std::min(start + bs, idx.size());
            const auto Xt = make_steps(X_ts, p, t, idx, start, end);
            const Eigen::VectorXd yb = gather(y, idx, start, end);
            zero_like_inplace(gv);
            const double loss = lstm_loss_grad(m, Xt, yb, &grads);
            check_loss_finite(loss, epoch, "train_lstm");
            apply_update(pv, gv, &cv, cfg);
        }
    }
    return m;
}

Eigen::MatrixXd mlp_extract(const MlpModel& m, const Eigen::MatrixXd& X) {
    if (m.layers.empty() || X.cols() != m.layers.front().W.cols())
        throw std::invalid_argument("mlp_extract: shape mismatch");
    Eigen::MatrixXd a = X.transpose();
    for (const auto& l : m.layers) a = apply_act((l.W * a).colwise() + l.b, l.act);
    return a.transpose();
}

Eigen::VectorXd mlp_predict(const MlpModel& m, const Eigen::MatrixXd& X) {
    const Eigen::MatrixXd F = mlp_extract(m, X);
    Eigen::RowVectorXd a = (m.head.W * F.transpose()).row(0);
    a.array() += m.head.b(0);
    return clamp_probs(a);
}

Eigen::MatrixXd sda_extract(const SdaModel& m, const Eigen::MatrixXd& X) {
    if (m.encoder.empty() || X.cols() != m.encoder.front().W.cols())
        throw std::invalid_argument("sda_extract: shape mismatch");
    return encoder_forward(m.encoder, X.transpose()).transpose();
}

Eigen::VectorXd sda_predict(const SdaModel& m, const Eigen::MatrixXd& X) {
    const Eigen::MatrixXd F = sda_extract(m, X);
    Eigen::RowVectorXd a = (m.head.W * F.transpose()).row(0);
    a.array() += m.head.b(0);
    return clamp_probs(a);
}

Eigen::MatrixXd lstm_extract(const LstmModel& m, const Eigen::MatrixXd& X_ts) {
    if (X_ts.cols() != static_cast<Eigen::Index>(m.n_inputs) * m.t_steps)
        throw std::invalid_argument("lstm_extract: shape mismatch");
    const auto idx = all_indices(X_ts.rows());
    const auto Xt = make_steps(X_ts, m.n_inputs, m.t_steps, idx, 0, idx.size());
    return lstm_forward(m, Xt).flat.transpose();
}

Eigen::VectorXd lstm_predict(const LstmModel& m, const Eigen::MatrixXd& X_ts) {
    const Eigen::MatrixXd F = lstm_extract(m, X_ts);
    Eigen::RowVectorXd a = (m.head.W * F.transpose()).row(0);
    a.array() += m.head.b(0);
    return clamp_probs(a);
}

void lstm_step(const LstmModel& m, const Eigen::VectorXd& x_t, const Eigen::VectorXd& h_prev,
               const Eigen::VectorXd& c_prev, Eigen::VectorXd& h_t, Eigen::VectorXd& c_t) {
    if (x_t.size() != m.n_inputs || h_prev.size() != m.hidden || c_prev.size() != m.hidden)
        throw std::invalid_argument("lstm_step: shape mismatch");
    const auto sig = [](const Eigen::VectorXd& v) {
        return v.unaryExpr([](double a) { return sigmoid_stable(a); });
    };
    const Eigen::VectorXd f = sig(m.W_fh * h_prev + m.W_fx * x_t + m.b_f);
    const Eigen::VectorXd i = sig(m.W_ih * h_prev + m.W_ix * x_t + m.b_i);
    const Eigen::VectorXd ct = (m.W_ch * h_prev + m.W_cx * x_t + m.b_c).array().tanh();
    const Eigen::VectorXd o = sig(m.W_oh * h_prev + m.W_ox * x_t + m.b_o);
    c_t = f.cwiseProduct(c_prev) + i.cwiseProduct(ct);
    h_t = o.cwiseProduct(c_t.array().tanh().matrix());
}

double gradient_check_mlp(int d_in, const std::vector<int>& hidden, int n_samples,
                          std::uint64_t seed, double eps) {
    auto rng = make_rng(derive_seed(seed, {hash64("gradcheck-mlp")}));
    MlpModel m;
    int fan_in = d_in;
    for (int hw : hidden) {
        m.layers.push_back(init_layer(hw, fan_in, Activation::sigmoid, rng));
        fan_in = hw;
    }
    m.head = init_layer(1, fan_in, Activation::sigmoid, rng);

    std::normal_distribution<double> gauss(0, 1);
    Eigen::MatrixXd Xb(d_in, n_samples);
    Eigen::VectorXd yb(n_samples);
    std::uniform_real_distribution<double> u(0, 1);
    for (Eigen::Index j = 0; j < Xb.cols(); ++j)
        for (Eigen::Index i = 0; i < Xb.rows(); ++i) Xb(i, j) = gauss(rng);
    for (Eigen::Index i = 0; i < yb.size(); ++i) yb(i) = u(rng) < 0.5 ? 0.0 : 1.0;

    MlpModel grads = mlp_zeros_like(m);
    mlp_loss_grad(m, Xb, yb, &grads);
    return max_rel_err(views_of(m), views_of(grads),
                       [&] { return mlp_loss_grad(m, Xb, yb, nullptr); }, eps);
}

double gradient_check_sda(int d_in, int hidden, double noise_rate, int n_samples,
                          std::uint64_t seed, double eps) {
    auto rng = make_rng(derive_seed(seed, {hash64("gradcheck-sda")}));
    LayerParams enc = init_layer(hidden, d_in, Activation::sigmoid, rng);
    Eigen::VectorXd b_d = Eigen::VectorXd::Zero(d_in);

    std::normal_distribution<double> gauss(0, 1);
    Eigen::MatrixXd Hb(d_in, n_samples);
    for (Eigen::Index j = 0; j < Hb.cols(); ++j)
        for (Eigen::Index i = 0; i < Hb.rows(); ++i) Hb(i, j) = gauss(rng);
    const Eigen::MatrixXd Hcor = corrupt(Hb, noise_rate, rng); // mask fixed for the check

    DaeGrads g{Eigen::MatrixXd::Zero(hidden, d_in), Eigen::VectorXd::Zero(hidden),
               Eigen::VectorXd::Zero(d_in)};
    dae_loss_grad(enc.W, enc.b, enc.act, b_d, Activation::identity, Hb, Hcor, &g);
    std::vector<View> pv{{enc.W.data(), enc.W.size()}, {enc.b.data(), enc.b.size()},
                         {b_d.data(), b_d.size()}};
    std::vector<View> gv{{g.W.data(), g.W.size()}, {g.b.data(), g.b.size()},
                         {g.b_d.data(), g.b_d.size()}};
    return max_rel_err(pv, gv,
                       [&] {
                           return dae_loss_grad(enc.W, enc.b, enc.act, b_d, Activation::identity,
                                                Hb, Hcor, nullptr);
                       },
                       eps);
}

double gradient_check_lstm(int p, int h, int t, int n_samples, std::uint64_t seed, double eps) {
    auto rng = make_rng(derive_seed(seed, {hash64("gradcheck-lstm")}));
    LstmModel m;
    m.hidden = h;
    m.n_inputs = p;
    m.t_steps = t;
    for (auto* w : {&m.W_fh, &m.W_ih, &m.W_ch, &m.W_oh})
        *w = init_layer(h, h, Activation::identity, rng).W;
    for (auto* w : {&m.W_fx, &m.W_ix, &m.W_cx, &m.W_ox})
        *w = init_layer(h, p, Activation::identity, rng).W;
    for (auto* b : {&m.b_f, &m.b_i, &m.b_c, &m.b_o}) *b = Eigen::VectorXd::Zero(h);
    m.head = init_layer(1, static_cast<Eigen::Index>(t) * h, Activation::sigmoid, rng);

    std::normal_distribution<double> gauss(0, 1);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<Eigen::MatrixXd> Xt(static_cast<std::size_t>(t));
    for (auto& x : Xt) {
        x.resize(p, n_samples);
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = gauss(rng);
    }
    Eigen::VectorXd yb(n_samples);
    for (Eigen::Index i = 0; i < yb.size(); ++i) yb(i) = u(rng) < 0.5 ? 0.0 : 1.0;

    LstmModel grads = lstm_zeros_like(m);
    lstm_loss_grad(m, Xt, yb, &grads);
    return max_rel_err(views_of(m), views_of(grads),
                       [&] { return lstm_loss_grad(m, Xt, yb, nullptr); }, eps);
}

} // namespace mimic
