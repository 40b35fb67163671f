#include "otforge/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace otforge::channel {

namespace {
constexpr double kRowSumTol = 1e-12;

void check_unique(const std::vector<std::string>& labels, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& l : labels)
        if (!seen.insert(l).second)
            throw std::invalid_argument(std::string("ChannelSpec: duplicate ") + what + " label '" + l + "'");
}
}  // namespace

BsecParams::BsecParams(double erasure_prob, double crossover_prob) : p(erasure_prob), q(crossover_prob) {
    if (!(p >= 0.0) || !(p <= 0.5))
        throw std::invalid_argument("BsecParams: p must satisfy 0 <= p <= 0.5");
    if (!(q >= 0.0) || !(q < 1.0))
        throw std::invalid_argument("BsecParams: q must satisfy 0 <= q < 1");
}

ChannelSpec::ChannelSpec(std::vector<std::string> inputs, std::vector<std::string> outputs,
                         std::vector<std::vector<double>> matrix)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), matrix_(std::move(matrix)) {
    if (inputs_.empty() || outputs_.empty())
        throw std::invalid_argument("ChannelSpec: alphabets must be non-empty");
    check_unique(inputs_, "input");
    check_unique(outputs_, "output");
    if (matrix_.size() != inputs_.size())
        throw std::invalid_argument("ChannelSpec: matrix must have one row per input symbol");
    cumulative_.resize(matrix_.size());
    for (std::size_t x = 0; x < matrix_.size(); ++x) {
        if (matrix_[x].size() != outputs_.size())
            throw std::invalid_argument("ChannelSpec: matrix row width must match output alphabet");
        double sum = 0.0;
        cumulative_[x].resize(outputs_.size());
        for (std::size_t y = 0; y < matrix_[x].size(); ++y) {
            const double v = matrix_[x][y];
            if (!(v >= 0.0) || !(v <= 1.0))
                throw std::invalid_argument("ChannelSpec: matrix entries must lie in [0,1]");
            sum += v;
            cumulative_[x][y] = sum;
        }
        if (std::fabs(sum - 1.0) > kRowSumTol)
            throw std::invalid_argument("ChannelSpec: matrix row must sum to 1 within 1e-12");
        cumulative_[x].back() = 1.0;
    }
}

std::optional<Symbol> ChannelSpec::input_index(std::string_view label) const {
    for (std::size_t i = 0; i < inputs_.size(); ++i)
        if (inputs_[i] == label) return static_cast<Symbol>(i);
    return std::nullopt;
}

std::optional<Symbol> ChannelSpec::output_index(std::string_view label) const {
    for (std::size_t i = 0; i < outputs_.size(); ++i)
        if (outputs_[i] == label) return static_cast<Symbol>(i);
    return std::nullopt;
}

Symbol ChannelSpec::sample_one(Symbol x, Rng& rng) const {
    if (x >= inputs_.size()) throw std::invalid_argument("ChannelSpec::sample_one: unknown input symbol");
    const double u = rng.uniform01();
    const auto& cum = cumulative_[x];
    for (std::size_t y = 0; y + 1 < cum.size(); ++y)
        if (u < cum[y]) return static_cast<Symbol>(y);
    return static_cast<Symbol>(cum.size() - 1);
}

nlohmann::json ChannelSpec::to_json() const {
    return nlohmann::json{{"inputs", inputs_}, {"outputs", outputs_}, {"matrix", matrix_}};
}

ChannelSpec ChannelSpec::from_json(const nlohmann::json& j) {
    return ChannelSpec(j.at("inputs").get<std::vector<std::string>>(),
                       j.at("outputs").get<std::vector<std::string>>(),
                       j.at("matrix").get<std::vector<std::vector<double>>>());
}

ChannelSpec make_bsec(const BsecParams& params) {
    const double p = params.p, q = params.q;
    const double keep_same = (1.0 - p) * (1.0 - q);
    const double keep_flip = (1.0 - p) * q;
    return ChannelSpec({"0", "1"}, {"0", "1", "e"},
                       {{keep_same, keep_flip, p}, {keep_flip, keep_same, p}});
}

ChannelSpec make_example1() {
    const std::vector<std::string> digits = {"0", "1", "e"};
    std::vector<std::string> inputs;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) inputs.push_back(std::to_string(a) + std::to_string(b));
    std::vector<std::string> outputs;
    for (const auto& a : digits)
        for (const auto& b : digits) outputs.push_back(a + b);

    auto out_idx = [&outputs](const std::string& label) {
        for (std::size_t i = 0; i < outputs.size(); ++i)
            if (outputs[i] == label) return i;
        throw std::logic_error("make_example1: missing output label");
    };

    std::vector<std::vector<double>> matrix(4, std::vector<double>(9, 0.0));
    for (int x1 = 0; x1 < 2; ++x1)
        for (int x2 = 0; x2 < 2; ++x2) {
            const std::size_t row = static_cast<std::size_t>(2 * x1 + x2);
            const std::string s1 = std::to_string(x1), s2 = std::to_string(x2);
            const std::string f1 = std::to_string(1 - x1), f2 = std::to_string(1 - x2);
            matrix[row][out_idx(s1 + "e")] = 0.25;
            matrix[row][out_idx("e" + s2)] = 0.25;
            matrix[row][out_idx(s1 + s2)] = 0.25;
            matrix[row][out_idx(s1 + f2)] = 0.125;
            matrix[row][out_idx(f1 + s2)] = 0.125;
        }
    return ChannelSpec(std::move(inputs), std::move(outputs), std::move(matrix));
}

ChannelSample sample(const ChannelSpec& spec, std::span<const Symbol> inputs, Rng& rng) {
    ChannelSample s;
    s.inputs.assign(inputs.begin(), inputs.end());
    s.outputs.resize(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) s.outputs[i] = spec.sample_one(inputs[i], rng);
    return s;
}

EmulatedUse emulate_bsec_pair(int x1, int x2, int y1, int y2) {
    if ((x1 != 0 && x1 != 1) || (x2 != 0 && x2 != 1))
        throw std::invalid_argument("emulate_bsec_pair: sender symbols must be bits");
    if (x1 != x2)
        throw std::invalid_argument("emulate_bsec_pair: sender pair must be aligned to equal bits");
    if ((y1 != 0 && y1 != 1) || (y2 != 0 && y2 != 1))
        throw std::invalid_argument("emulate_bsec_pair: receiver symbols must be non-erased bits");
    EmulatedUse use;
    use.x = x1;
    use.y = (y1 == y2) ? static_cast<Symbol>(y1) : kBsecErasure;
    return use;
}

EmulatedParams emulated_params(double q) {
    if (!(q > 0.0) || !(q < 1.0))
        throw std::invalid_argument("emulated_params: q must satisfy 0 < q < 1");
    const double p_next = 2.0 * q * (1.0 - q);
    const double q_next = q * q / ((1.0 - q) * (1.0 - q) + q * q);
    return {p_next, q_next};
}

}  // namespace otforge::channel
