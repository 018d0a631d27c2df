#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mimic {

enum class Activation { sigmoid, tanh_act, relu, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct LayerParams {
    Eigen::MatrixXd W; // fan_out x fan_in
    Eigen::VectorXd b; // fan_out
    Activation act = Activation::sigmoid;
};

enum class Optimizer { sgd, rmsprop };

struct TrainConfig {
    int epochs = 50;
    double learning_rate = 0.001;
    Optimizer optimizer = Optimizer::sgd;
    int batch_size = 32;
    int hidden_multiplier = 2;
    Activation hidden_activation = Activation::sigmoid;
    double noise_rate = 0.2; // SDA masking fraction
    int hidden_size = -1;    // LSTM H; -1 = 2*P
    std::uint64_t seed = 0;

    void validate() const;
};

struct MlpModel {
    std::vector<LayerParams> layers; // hidden layers
    LayerParams head;                // 1 x F sigmoid prediction layer
};

// Tied weights: decoder layer l reuses the transpose of encoder layer l's
// weights and owns only its bias. The bottom decoder (raw-input
// reconstruction) is linear; deeper decoders use the encoder activation.
struct SdaModel {
    std::vector<LayerParams> encoder;
    std::vector<Eigen::VectorXd> decoder_biases;
    LayerParams head;
    double noise_rate = 0.2;
};

struct LstmModel {
    Eigen::MatrixXd W_fh, W_ih, W_ch, W_oh; // H x H
    Eigen::MatrixXd W_fx, W_ix, W_cx, W_ox; // H x P
    Eigen::VectorXd b_f, b_i, b_c, b_o;     // H
    int hidden = 0;
    int n_inputs = 0; // P
    int t_steps = 0;  // T
    LayerParams head; // 1 x (T*H) sigmoid over flattened (h_1..h_T)
};

MlpModel train_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TrainConfig& cfg);
SdaModel train_sda(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TrainConfig& cfg);
// X_ts is N x (P*T), column index var*T + day.
LstmModel train_lstm(const Eigen::MatrixXd& X_ts, int p, int t, const Eigen::VectorXd& y,
                     const TrainConfig& cfg);

Eigen::MatrixXd mlp_extract(const MlpModel& m, const Eigen::MatrixXd& X);
Eigen::VectorXd mlp_predict(const MlpModel& m, const Eigen::MatrixXd& X);
Eigen::MatrixXd sda_extract(const SdaModel& m, const Eigen::MatrixXd& X);
Eigen::VectorXd sda_predict(const SdaModel& m, const Eigen::MatrixXd& X);
Eigen::MatrixXd lstm_extract(const LstmModel& m, const Eigen::MatrixXd& X_ts);
Eigen::VectorXd lstm_predict(const LstmModel& m, const Eigen::MatrixXd& X_ts);

// One LSTM block update: sigmoid gates, tanh candidate, elementwise products.
void lstm_step(const LstmModel& m, const Eigen::VectorXd& x_t, const Eigen::VectorXd& h_prev,
               const Eigen::VectorXd& c_prev, Eigen::VectorXd& h_t, Eigen::VectorXd& c_t);

// Mask each coordinate to 0 independently with the given probability.
Eigen::MatrixXd corrupt(const Eigen::MatrixXd& X, double rate, std::mt19937_64& rng);

// Squared reconstruction loss of one tied-weight denoising layer (samples as
// columns). Optional gradient outputs cover the shared weights and both
// biases.
double dae_loss(const LayerParams& encoder, const Eigen::VectorXd& decoder_bias,
                Activation decoder_act, const Eigen::MatrixXd& clean,
                const Eigen::MatrixXd& corrupted, Eigen::MatrixXd* grad_w = nullptr,
                Eigen::VectorXd* grad_b = nullptr, Eigen::VectorXd* grad_bd = nullptr);

inline void rmsprop_step(double& param, double grad, double& cache, double lr,
                         double decay = 0.9, double eps = 1e-8) {
    cache = decay * cache + (1.0 - decay) * grad * grad;
    param -= lr * grad / (std::sqrt(cache) + eps);
}

template <class Derived>
void rmsprop_step(Eigen::MatrixBase<Derived>& param, const Eigen::MatrixBase<Derived>& grad,
                  Eigen::MatrixBase<Derived>& cache, double lr, double decay = 0.9,
                  double eps = 1e-8) {
    cache.array() = decay * cache.array() + (1.0 - decay) * grad.array().square();
    param.array() -= lr * grad.array() / (cache.array().sqrt() + eps);
}

// Central finite differences over every parameter of the full loss; returns
// max over parameters of |analytic-numeric| / max(1e-8, |analytic|+|numeric|).
double gradient_check_mlp(int d_in, const std::vector<int>& hidden, int n_samples,
                          std::uint64_t seed, double eps = 1e-5);
double gradient_check_sda(int d_in, int hidden, double noise_rate, int n_samples,
                          std::uint64_t seed, double eps = 1e-5);
double gradient_check_lstm(int p, int h, int t, int n_samples, std::uint64_t seed,
                           double eps = 1e-5);

} // namespace mimic
