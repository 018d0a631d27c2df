#include "mimic/serialize.hpp"

#include <stdexcept>

namespace mimic {

namespace {

using json = nlohmann::ordered_json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto flat = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
        throw std::invalid_argument("matrix payload size mismatch");
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = flat[k++];
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    const auto flat = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

json layer_to_json(const LayerParams& l) {
    return {{"weights", matrix_to_json(l.W)},
            {"bias", vector_to_json(l.b)},
            {"activation", to_string(l.act)}};
}

LayerParams layer_from_json(const nlohmann::json& j) {
    LayerParams l;
    l.W = matrix_from_json(j.at("weights"));
    l.b = vector_from_json(j.at("bias"));
    l.act = activation_from_string(j.at("activation").get<std::string>());
    return l;
}

json node_to_json(const Tree& t, int i) {
    const auto& nd = t.nodes[static_cast<std::size_t>(i)];
    json j;
    j["n_samples"] = nd.n_samples;
    j["impurity"] = nd.impurity;
    if (nd.feature >= 0) {
        j["feature"] = nd.feature;
        j["threshold"] = nd.threshold;
        j["left"] = node_to_json(t, nd.left);
        j["right"] = node_to_json(t, nd.right);
    } else {
        j["value"] = nd.value;
    }
    return j;
}

int node_from_json(const nlohmann::json& j, Tree& t) {
    const auto id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    t.nodes[static_cast<std::size_t>(id)].n_samples = j.at("n_samples").get<long>();
    t.nodes[static_cast<std::size_t>(id)].impurity = j.at("impurity").get<double>();
    if (j.contains("feature")) {
        t.nodes[static_cast<std::size_t>(id)].feature = j.at("feature").get<int>();
        t.nodes[static_cast<std::size_t>(id)].threshold = j.at("threshold").get<double>();
        const int l = node_from_json(j.at("left"), t);
        const int r = node_from_json(j.at("right"), t);
        t.nodes[static_cast<std::size_t>(id)].left = l;
        t.nodes[static_cast<std::size_t>(id)].right = r;
    } else {
        t.nodes[static_cast<std::size_t>(id)].value = j.at("value").get<double>();
    }
    return id;
}

void require_kind(const nlohmann::json& j, const std::string& kind) {
    if (j.at("kind").get<std::string>() != kind)
        throw std::invalid_argument("expected model kind '" + kind + "', got '" +
                                    j.at("kind").get<std::string>() + "'");
}

} // namespace

json to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"learning_rate", c.learning_rate},
            {"optimizer", c.optimizer == Optimizer::rmsprop ? "rmsprop" : "sgd"},
            {"batch_size", c.batch_size},
            {"hidden_multiplier", c.hidden_multiplier},
            {"hidden_activation", to_string(c.hidden_activation)},
            {"noise_rate", c.noise_rate},
            {"hidden_size", c.hidden_size},
            {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.optimizer = j.value("optimizer", "sgd") == std::string("rmsprop") ? Optimizer::rmsprop
                                                                        : Optimizer::sgd;
    c.batch_size = j.value("batch_size", c.batch_size);
    c.hidden_multiplier = j.value("hidden_multiplier", c.hidden_multiplier);
    c.hidden_activation = activation_from_string(j.value("hidden_activation", "sigmoid"));
    c.noise_rate = j.value("noise_rate", c.noise_rate);
    c.hidden_size = j.value("hidden_size", c.hidden_size);
    c.seed = j.value("seed", c.seed);
    return c;
}

json to_json(const TreeConfig& c) {
    return {{"max_depth", c.max_depth},
            {"n_stages", c.n_stages},
            {"shrinkage", c.shrinkage},
            {"min_samples_split", c.min_samples_split},
            {"seed", c.seed}};
}

TreeConfig tree_config_from_json(const nlohmann::json& j) {
    TreeConfig c;
    c.max_depth = j.value("max_depth", c.max_depth);
    c.n_stages = j.value("n_stages", c.n_stages);
    c.shrinkage = j.value("shrinkage", c.shrinkage);
    c.min_samples_split = j.value("min_samples_split", c.min_samples_split);
    c.seed = j.value("seed", c.seed);
    return c;
}

json to_json(const MlpModel& m) {
    json j;
    j["kind"] = "mlp";
    j["layers"] = json::array();
    for (const auto& l : m.layers) j["layers"].push_back(layer_to_json(l));
    j["head"] = layer_to_json(m.head);
    return j;
}

MlpModel mlp_from_json(const nlohmann::json& j) {
    require_kind(j, "mlp");
    MlpModel m;
    for (const auto& l : j.at("layers")) m.layers.push_back(layer_from_json(l));
    m.head = layer_from_json(j.at("head"));
    return m;
}

json to_json(const SdaModel& m) {
    json j;
    j["kind"] = "sda";
    j["encoder"] = json::array();
    for (const auto& l : m.encoder) j["encoder"].push_back(layer_to_json(l));
    j["decoder_biases"] = json::array();
    for (const auto& b : m.decoder_biases) j["decoder_biases"].push_back(vector_to_json(b));
    j["head"] = layer_to_json(m.head);
    j["noise_rate"] = m.noise_rate;
    return j;
}

SdaModel sda_from_json(const nlohmann::json& j) {
    require_kind(j, "sda");
    SdaModel m;
    for (const auto& l : j.at("encoder")) m.encoder.push_back(layer_from_json(l));
    for (const auto& b : j.at("decoder_biases")) m.decoder_biases.push_back(vector_from_json(b));
    m.head = layer_from_json(j.at("head"));
    m.noise_rate = j.at("noise_rate").get<double>();
    return m;
}

json to_json(const LstmModel& m) {
    json j;
    j["kind"] = "lstm";
    j["hidden"] = m.hidden;
    j["n_inputs"] = m.n_inputs;
    j["t_steps"] = m.t_steps;
    j["W_fh"] = matrix_to_json(m.W_fh);
    j["W_ih"] = matrix_to_json(m.W_ih);
    j["W_ch"] = matrix_to_json(m.W_ch);
    j["W_oh"] = matrix_to_json(m.W_oh);
    j["W_fx"] = matrix_to_json(m.W_fx);
    j["W_ix"] = matrix_to_json(m.W_ix);
    j["W_cx"] = matrix_to_json(m.W_cx);
    j["W_ox"] = matrix_to_json(m.W_ox);
    j["b_f"] = vector_to_json(m.b_f);
    j["b_i"] = vector_to_json(m.b_i);
    j["b_c"] = vector_to_json(m.b_c);
    j["b_o"] = vector_to_json(m.b_o);
    j["head"] = layer_to_json(m.head);
    return j;
}

LstmModel lstm_from_json(const nlohmann::json& j) {
    require_kind(j, "lstm");
    LstmModel m;
    m.hidden = j.at("hidden").get<int>();
    m.n_inputs = j.at("n_inputs").get<int>();
    m.t_steps = j.at("t_steps").get<int>();
    m.W_fh = matrix_from_json(j.at("W_fh"));
    m.W_ih = matrix_from_json(j.at("W_ih"));
    m.W_ch = matrix_from_json(j.at("W_ch"));
    m.W_oh = matrix_from_json(j.at("W_oh"));
    m.W_fx = matrix_from_json(j.at("W_fx"));
    m.W_ix = matrix_from_json(j.at("W_ix"));
    m.W_cx = matrix_from_json(j.at("W_cx"));
    m.W_ox = matrix_from_json(j.at("W_ox"));
    m.b_f = vector_from_json(j.at("b_f"));
    m.b_i = vector_from_json(j.at("b_i"));
    m.b_c = vector_from_json(j.at("b_c"));
    m.b_o = vector_from_json(j.at("b_o"));
    m.head = layer_from_json(j.at("head"));
    return m;
}

json to_json(const LinearModel& m) {
    return {{"kind", m.kind == LinearKind::logreg ? "logreg" : "linsvm"},
            {"weights", vector_to_json(m.weights)},
            {"bias", m.bias},
            {"l2", m.l2},
            {"converged", m.converged},
            {"final_grad_norm", m.final_grad_norm}};
}

LinearModel linear_from_json(const nlohmann::json& j) {
    LinearModel m;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "logreg") m.kind = LinearKind::logreg;
    else if (kind == "linsvm") m.kind = LinearKind::linsvm;
    else throw std::invalid_argument("unknown linear kind '" + kind + "'");
    m.weights = vector_from_json(j.at("weights"));
    m.bias = j.at("bias").get<double>();
    m.l2 = j.at("l2").get<double>();
    m.converged = j.at("converged").get<bool>();
    m.final_grad_norm = j.at("final_grad_norm").get<double>();
    return m;
}

json to_json(const Tree& t) {
    json j;
    j["kind"] = "tree";
    j["tree_kind"] = t.kind == TreeKind::classifier_gini ? "classifier_gini" : "regressor_mse";
    j["max_depth"] = t.max_depth;
    j["n_features"] = t.n_features;
    j["root"] = t.nodes.empty() ? json(nullptr) : node_to_json(t, 0);
    return j;
}

Tree tree_from_json(const nlohmann::json& j) {
    require_kind(j, "tree");
    Tree t;
    t.kind = j.at("tree_kind").get<std::string>() == "classifier_gini" ? TreeKind::classifier_gini
                                                                       : TreeKind::regressor_mse;
    t.max_depth = j.at("max_depth").get<int>();
    t.n_features = j.at("n_features").get<int>();
    if (!j.at("root").is_null()) node_from_json(j.at("root"), t);
    return t;
}

json to_json(const GbtEnsemble& e) {
    json j;
    j["kind"] = "gbt";
    j["base_score"] = e.base_score;
    j["shrinkage"] = e.shrinkage;
    j["n_features"] = e.n_features;
    j["stages"] = json::array();
    for (const auto& s : e.stages) j["stages"].push_back(to_json(s));
    j["train_mse"] = e.train_mse;
    return j;
}

GbtEnsemble gbt_from_json(const nlohmann::json& j) {
    require_kind(j, "gbt");
    GbtEnsemble e;
    e.base_score = j.at("base_score").get<double>();
    e.shrinkage = j.at("shrinkage").get<double>();
    e.n_features = j.at("n_features").get<int>();
    for (const auto& s : j.at("stages")) e.stages.push_back(tree_from_json(s));
    e.train_mse = j.value("train_mse", std::vector<double>{});
    return e;
}

json to_json(const MimicModel& m) {
    json j;
    j["kind"] = "mimic";
    j["pipeline"] = to_string(m.pipeline);
    j["teacher"] = {{"kind", to_string(m.teacher.kind)},
                    {"with_lr_head", m.teacher.with_lr_head},
                    {"train_config", to_json(m.teacher.train_config)}};
    j["student_kind"] = m.student_kind == StudentKind::gbt ? "gbt" : "dt";
    j["student"] = std::holds_alternative<GbtEnsemble>(m.student)
                       ? to_json(std::get<GbtEnsemble>(m.student))
                       : to_json(std::get<Tree>(m.student));
    j["soft_target_stats"] = {{"min", m.soft_target_stats.min},
                              {"max", m.soft_target_stats.max},
                              {"mean", m.soft_target_stats.mean}};
    return j;
}

MimicModel mimic_from_json(const nlohmann::json& j) {
    require_kind(j, "mimic");
    MimicModel m;
    m.pipeline = j.at("pipeline").get<std::string>() == "p1" ? Pipeline::p1 : Pipeline::p2;
    m.teacher.kind = teacher_from_string(j.at("teacher").at("kind").get<std::string>());
    m.teacher.with_lr_head = j.at("teacher").at("with_lr_head").get<bool>();
    m.teacher.train_config = train_config_from_json(j.at("teacher").at("train_config"));
    m.student_kind =
        j.at("student_kind").get<std::string>() == "gbt" ? StudentKind::gbt : StudentKind::dt;
    if (m.student_kind == StudentKind::gbt) m.student = gbt_from_json(j.at("student"));
    else m.student = tree_from_json(j.at("student"));
    m.soft_target_stats = {j.at("soft_target_stats").at("min").get<double>(),
                           j.at("soft_target_stats").at("max").get<double>(),
                           j.at("soft_target_stats").at("mean").get<double>()};
    return m;
}

} // namespace mimic
