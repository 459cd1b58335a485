#include "model_json.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/models.hpp"

#include <fstream>

namespace stackcast {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kModelFormat = "stackcast-model";
constexpr int kModelVersion = 1;

json matrix_to_json(const Matrix& m) {
    json out;
    out["rows"] = m.rows();
    out["cols"] = m.cols();
    out["values"] = m.entries();
    return out;
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != m.size()) throw ValidationError("model file: tensor size mismatch");
    m.entries() = values;
    return m;
}

json scaler_to_json(const ScalerParams& scaler) {
    json out;
    if (scaler.kind == ScalerKind::minmax) {
        out["kind"] = "minmax";
        out["min"] = scaler.min;
        out["max"] = scaler.max;
    } else {
        out["kind"] = "standard";
        out["mean"] = scaler.mean;
        out["std"] = scaler.std_dev;
    }
    return out;
}

ScalerParams scaler_from_json(const json& j) {
    ScalerParams scaler;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "minmax") {
        scaler.kind = ScalerKind::minmax;
        scaler.min = j.at("min").get<double>();
        scaler.max = j.at("max").get<double>();
    } else if (kind == "standard") {
        scaler.kind = ScalerKind::standard;
        scaler.mean = j.at("mean").get<double>();
        scaler.std_dev = j.at("std").get<double>();
    } else {
        throw ValidationError("model file: unknown scaler kind '" + kind + "'");
    }
    return scaler;
}

json dense_to_json(const DenseParams& layer) {
    json out;
    out["weights"] = matrix_to_json(layer.weights);
    out["bias"] = matrix_to_json(layer.bias);
    return out;
}

DenseParams dense_from_json(const json& j) {
    return {matrix_from_json(j.at("weights")), matrix_from_json(j.at("bias"))};
}

} // namespace

json model_to_json(const ForecastModel& model) {
    json out;
    out["format"] = kModelFormat;
    out["version"] = kModelVersion;
    out["kind"] = model_kind_to_string(model.kind);
    out["window"] = model.window;
    out["scaler"] = scaler_to_json(model.scaler);
    json layers = json::array();
    switch (model.kind) {
    case ModelKind::naive: break;
    case ModelKind::ann:
        for (const auto& layer : model.dense_layers) layers.push_back(dense_to_json(layer));
        break;
    case ModelKind::lstm:
        for (const auto& layer : model.lstm_layers) {
            json l;
            l["w_in"] = matrix_to_json(layer.w_in);
            l["w_rec"] = matrix_to_json(layer.w_rec);
            l["bias"] = matrix_to_json(layer.bias);
            layers.push_back(std::move(l));
        }
        break;
    case ModelKind::rnn:
        for (const auto& layer : model.rnn_layers) {
            json l;
            l["w_in"] = matrix_to_json(layer.w_in);
            l["w_rec"] = matrix_to_json(layer.w_rec);
            l["bias"] = matrix_to_json(layer.bias);
            layers.push_back(std::move(l));
        }
        break;
    }
    out["layers"] = std::move(layers);
    if (model.kind == ModelKind::lstm || model.kind == ModelKind::rnn)
        out["head"] = dense_to_json(model.dense_layers.front());
    return out;
}

ForecastModel model_from_json(const json& j) {
    if (j.value("format", "") != kModelFormat)
        throw ValidationError("not a stackcast model file");
    if (j.at("version").get<int>() != kModelVersion)
        throw ValidationError("unsupported model file version");

    ForecastModel model;
    model.kind = model_kind_from_string(j.at("kind").get<std::string>());
    model.window = j.at("window").get<std::size_t>();
    model.scaler = scaler_from_json(j.at("scaler"));
    const auto& layers = j.at("layers");
    switch (model.kind) {
    case ModelKind::naive: break;
    case ModelKind::ann:
        for (const auto& l : layers) model.dense_layers.push_back(dense_from_json(l));
        break;
    case ModelKind::lstm:
        for (const auto& l : layers) {
            LstmCellParams p;
            p.w_in = matrix_from_json(l.at("w_in"));
            p.w_rec = matrix_from_json(l.at("w_rec"));
            p.bias = matrix_from_json(l.at("bias"));
            model.lstm_layers.push_back(std::move(p));
        }
        model.dense_layers.push_back(dense_from_json(j.at("head")));
        break;
    case ModelKind::rnn:
        for (const auto& l : layers) {
            RnnCellParams p;
            p.w_in = matrix_from_json(l.at("w_in"));
            p.w_rec = matrix_from_json(l.at("w_rec"));
            p.bias = matrix_from_json(l.at("bias"));
            model.rnn_layers.push_back(std::move(p));
        }
        model.dense_layers.push_back(dense_from_json(j.at("head")));
        break;
    }
    return model;
}

void save_model(const ForecastModel& model, std::ostream& out) {
    out << model_to_json(model).dump(2) << '\n';
}

void save_model(const ForecastModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file '" + path + "'");
    save_model(model, out);
}

ForecastModel load_model(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model file: ") + e.what());
    }
    return model_from_json(j);
}

ForecastModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read model file '" + path + "'");
    return load_model(in);
}

} // namespace stackcast
