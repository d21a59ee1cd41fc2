#include "cmaa2c/checkpoint.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "cmaa2c/errors.hpp"

namespace cmaa2c::nn {

namespace {

constexpr const char* kMagic = "cmaa2c-mlp";
constexpr int kVersion = 1;

void expect_token(std::istream& in, const std::string& token) {
    std::string got;
    if (!(in >> got) || got != token)
        throw ConfigError("checkpoint: expected '" + token + "', found '" + got + "'");
}

}  // namespace

void save_mlp(std::ostream& out, const Mlp& net) {
    out << kMagic << ' ' << kVersion << '\n';
    out << "layers " << net.layers().size() << '\n';
    for (const auto& layer : net.layers()) {
        out << layer.weight.cols() << ' ' << layer.weight.rows() << ' '
            << (layer.activation == Activation::relu ? "relu" : "linear") << '\n';
    }
    out << std::setprecision(17);
    for (const auto& layer : net.layers()) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) out << (c ? " " : "") << layer.weight(r, c);
            out << '\n';
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out << (r ? " " : "") << layer.bias(r);
        out << '\n';
    }
}

Mlp load_mlp(std::istream& in) {
    expect_token(in, kMagic);
    int version = 0;
    if (!(in >> version) || version != kVersion)
        throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
    expect_token(in, "layers");
    std::size_t count = 0;
    if (!(in >> count) || count == 0) throw ConfigError("checkpoint: bad layer count");

    std::vector<Layer> layers(count);
    for (auto& layer : layers) {
        Eigen::Index width_in = 0, width_out = 0;
        std::string activation;
        if (!(in >> width_in >> width_out >> activation) || width_in <= 0 || width_out <= 0)
            throw ConfigError("checkpoint: bad layer header");
        if (activation == "relu")
            layer.activation = Activation::relu;
        else if (activation == "linear")
            layer.activation = Activation::linear;
        else
            throw ConfigError("checkpoint: unknown activation '" + activation + "'");
        layer.weight.resize(width_out, width_in);
        layer.bias.resize(width_out);
    }
    for (auto& layer : layers) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                if (!(in >> layer.weight(r, c))) throw ConfigError("checkpoint: truncated weights");
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
            if (!(in >> layer.bias(r))) throw ConfigError("checkpoint: truncated biases");
    }
    return Mlp(std::move(layers));
}

void save_mlp(const std::filesystem::path& path, const Mlp& net) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write checkpoint " + path.string());
    save_mlp(out, net);
}

Mlp load_mlp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read checkpoint " + path.string());
    return load_mlp(in);
}

}  // namespace cmaa2c::nn
