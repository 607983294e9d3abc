#include "meaad/formats.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "meaad/error.hpp"

namespace meaad {

namespace {

constexpr std::string_view kVersion = "v1";

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(text.substr(start));
            return out;
        }
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

template <typename Int>
Int parse_int(std::string_view text, std::string_view what) {
    Int value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::Parse, "bad " + std::string(what) + " '" + std::string(text) + "'");
    }
    return value;
}

/// `MAGIC v1 key=value ...` -> key/value map, after checking magic and version.
std::map<std::string, std::string, std::less<>> parse_header(std::string_view line, std::string_view magic) {
    const auto tokens = split(line, ' ');
    if (tokens.empty() || tokens[0] != magic) {
        throw Error(ErrorCode::Parse, "expected a " + std::string(magic) + " header");
    }
    if (tokens.size() < 2 || tokens[1] != kVersion) {
        throw Error(ErrorCode::UnsupportedVersion,
                    std::string(magic) + " version '" + std::string(tokens.size() < 2 ? "" : tokens[1]) +
                        "' is not supported");
    }
    std::map<std::string, std::string, std::less<>> kv;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
        if (tokens[i].empty()) continue;
        const auto eq = tokens[i].find('=');
        if (eq == std::string_view::npos) throw Error(ErrorCode::Parse, "malformed header token '" + std::string(tokens[i]) + "'");
        kv.emplace(std::string(tokens[i].substr(0, eq)), std::string(tokens[i].substr(eq + 1)));
    }
    return kv;
}

const std::string& header_value(const std::map<std::string, std::string, std::less<>>& kv, std::string_view key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::Parse, "header is missing '" + std::string(key) + "'");
    return it->second;
}

bool next_line(std::istream& is, std::string& line) {
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) return true;
    }
    return false;
}

std::string first_line(std::istream& is, std::string_view magic) {
    std::string line;
    if (!next_line(is, line)) throw Error(ErrorCode::Parse, "empty file, expected " + std::string(magic));
    return line;
}

std::vector<double> parse_reals(std::string_view text) {
    std::vector<double> out;
    for (auto token : split(text, ',')) out.push_back(parse_double(token));
    return out;
}

void write_reals(std::ostream& os, std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) os << ',';
        os << format_real(values[i]);
    }
}

std::vector<std::size_t> parse_size_list(std::string_view text) {
    std::vector<std::size_t> out;
    if (text.empty()) return out;
    for (auto token : split(text, ',')) out.push_back(parse_int<std::size_t>(token, "list entry"));
    return out;
}

}  // namespace

std::string format_real(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

std::string format_real(float x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::Parse, "bad real '" + std::string(text) + "'");
    }
    if (!std::isfinite(value)) throw Error(ErrorCode::NonFinite, "non-finite real '" + std::string(text) + "'");
    return value;
}

float parse_float(std::string_view text) {
    float value = 0.0f;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::Parse, "bad real '" + std::string(text) + "'");
    }
    if (!std::isfinite(value)) throw Error(ErrorCode::NonFinite, "non-finite real '" + std::string(text) + "'");
    return value;
}

void write_expert_index(std::ostream& os, const ExpertIndex& index) {
    os << "MEAAD-EMB v1 dim=" << index.dimension() << " expert=" << index.expert_id() << '\n';
    for (const auto& item : index.items()) {
        os << item.item_id << '\t' << item.identity_id << '\t';
        write_reals(os, item.embedding.values());
        os << '\n';
    }
}

ExpertIndex read_expert_index(std::istream& is) {
    const auto header = parse_header(first_line(is, "MEAAD-EMB"), "MEAAD-EMB");
    const auto dim = parse_int<std::size_t>(header_value(header, "dim"), "dim");
    const auto expert = parse_int<ExpertId>(header_value(header, "expert"), "expert");
    std::vector<GalleryItem> items;
    std::string line;
    while (next_line(is, line)) {
        const auto fields = split(line, '\t');
        if (fields.size() != 3) throw Error(ErrorCode::Parse, "embedding row needs 3 tab-separated fields");
        auto values = parse_reals(fields[2]);
        if (values.size() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "embedding row has " + std::to_string(values.size()) +
                                                          " values, header says dim=" + std::to_string(dim));
        }
        items.push_back({parse_int<ItemId>(fields[0], "item_id"), parse_int<IdentityId>(fields[1], "identity_id"),
                         EmbeddingVector::from_unit(std::move(values))});
    }
    return ExpertIndex(expert, std::move(items));
}

void write_queries(std::ostream& os, std::span<const QuerySample> queries, std::size_t dimension,
                   std::size_t n_experts) {
    os << "MEAAD-QRY v1 dim=" << dimension << " experts=" << n_experts << '\n';
    for (const auto& q : queries) {
        if (q.embeddings.size() != n_experts) {
            throw Error(ErrorCode::DimensionMismatch, "query " + std::to_string(q.query_id) + " has the wrong channel count");
        }
        os << q.query_id << '\t' << q.identity_id << '\t' << to_string(q.label) << '\t';
        for (std::size_t e = 0; e < q.embeddings.size(); ++e) {
            if (q.embeddings[e].dimension() != dimension) {
                throw Error(ErrorCode::DimensionMismatch, "query " + std::to_string(q.query_id) + " has the wrong dimension");
            }
            if (e > 0) os << ';';
            write_reals(os, q.embeddings[e].values());
        }
        os << '\n';
    }
}

QueryFile read_queries(std::istream& is) {
    const auto header = parse_header(first_line(is, "MEAAD-QRY"), "MEAAD-QRY");
    QueryFile out;
    out.dimension = parse_int<std::size_t>(header_value(header, "dim"), "dim");
    out.n_experts = parse_int<std::size_t>(header_value(header, "experts"), "experts");
    std::string line;
    while (next_line(is, line)) {
        const auto fields = split(line, '\t');
        if (fields.size() != 4) throw Error(ErrorCode::Parse, "query row needs 4 tab-separated fields");
        QuerySample q;
        q.query_id = parse_int<QueryId>(fields[0], "query_id");
        q.identity_id = parse_int<IdentityId>(fields[1], "identity_id");
        q.label = parse_query_label(fields[2]);
        const auto channels = split(fields[3], ';');
        if (channels.size() != out.n_experts) {
            throw Error(ErrorCode::DimensionMismatch, "query " + std::to_string(q.query_id) + " has " +
                                                          std::to_string(channels.size()) + " channels, header says " +
                                                          std::to_string(out.n_experts));
        }
        for (auto channel : channels) {
            auto values = parse_reals(channel);
            if (values.size() != out.dimension) {
                throw Error(ErrorCode::DimensionMismatch, "query " + std::to_string(q.query_id) + " has a channel of dimension " +
                                                              std::to_string(values.size()));
            }
            q.embeddings.push_back(EmbeddingVector::from_unit(std::move(values)));
        }
        out.queries.push_back(std::move(q));
    }
    return out;
}

void write_feature_dataset(std::ostream& os, const FeatureDataset& dataset) {
    os << "MEAAD-FEAT v1 n=" << dataset.layout.n_experts << " k=" << dataset.layout.support_size
       << " d=" << dataset.dimension() << '\n';
    for (const auto& e : dataset.examples) {
        if (e.feature.size() != dataset.dimension()) {
            throw Error(ErrorCode::DimensionMismatch, "feature length does not match the dataset header");
        }
        os << e.query_id << '\t' << e.label << '\t';
        write_reals(os, e.feature);
        os << '\n';
    }
}

FeatureDataset read_feature_dataset(std::istream& is) {
    const auto header = parse_header(first_line(is, "MEAAD-FEAT"), "MEAAD-FEAT");
    FeatureDataset out;
    out.layout.n_experts = parse_int<std::size_t>(header_value(header, "n"), "n");
    out.layout.support_size = parse_int<std::size_t>(header_value(header, "k"), "k");
    const auto d = parse_int<std::size_t>(header_value(header, "d"), "d");
    if (d != out.layout.dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "header d=" + std::to_string(d) + " contradicts n and k (expected " +
                                                      std::to_string(out.layout.dimension()) + ")");
    }
    std::string line;
    while (next_line(is, line)) {
        const auto fields = split(line, '\t');
        if (fields.size() != 3) throw Error(ErrorCode::Parse, "feature row needs 3 tab-separated fields");
        LabeledExample e;
        e.query_id = parse_int<QueryId>(fields[0], "query_id");
        e.label = parse_int<int>(fields[1], "label");
        if (e.label != 0 && e.label != 1) throw Error(ErrorCode::Parse, "feature label must be 0 or 1");
        e.feature = parse_reals(fields[2]);
        if (e.feature.size() != d) {
            throw Error(ErrorCode::DimensionMismatch, "feature row has " + std::to_string(e.feature.size()) +
                                                          " values, header says d=" + std::to_string(d));
        }
        out.examples.push_back(std::move(e));
    }
    return out;
}

void write_detector(std::ostream& os, const DetectorModel& model) {
    const auto& layers = model.network.layers();
    const auto& h = model.hyperparams;
    os << "MEAAD-MODEL v1 real=f32 input_dim=" << model.input_dim() << " layers=" << layers.size()
       << " n=" << model.layout.n_experts << " k=" << model.layout.support_size
       << " blocks=" << model.blocks.to_string() << '\n';
    os << "hyper learning_rate=" << format_real(h.learning_rate) << " momentum=" << format_real(h.momentum)
       << " batch_size=" << h.batch_size << " iterations=" << h.iterations << " seed=" << h.seed << " hidden=";
    for (std::size_t i = 0; i < h.hidden.size(); ++i) os << (i ? "," : "") << h.hidden[i];
    os << '\n';
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& w = layers[l].weights;
        os << "layer " << l << " rows=" << w.rows() << " cols=" << w.cols() << '\n';
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            os << 'w';
            for (Eigen::Index c = 0; c < w.cols(); ++c) os << (c ? ',' : '\t') << format_real(w(r, c));
            os << '\n';
        }
        os << 'b';
        for (Eigen::Index r = 0; r < layers[l].bias.size(); ++r) os << (r ? ',' : '\t') << format_real(layers[l].bias(r));
        os << '\n';
    }
}

DetectorModel read_detector(std::istream& is) {
    using Net = Mlp<DetectorReal>;
    const auto header = parse_header(first_line(is, "MEAAD-MODEL"), "MEAAD-MODEL");
    if (header_value(header, "real") != "f32") throw Error(ErrorCode::UnsupportedVersion, "model scalar type must be f32");
    const auto input_dim = parse_int<std::size_t>(header_value(header, "input_dim"), "input_dim");
    const auto n_layers = parse_int<std::size_t>(header_value(header, "layers"), "layers");

    DetectorModel model;
    model.layout.n_experts = parse_int<std::size_t>(header_value(header, "n"), "n");
    model.layout.support_size = parse_int<std::size_t>(header_value(header, "k"), "k");
    model.blocks = FeatureBlocks::parse(header_value(header, "blocks"));

    std::string line;
    if (!next_line(is, line) || !line.starts_with("hyper ")) throw Error(ErrorCode::Parse, "model is missing its hyper line");
    {
        std::map<std::string, std::string, std::less<>> kv;
        for (auto token : split(std::string_view(line).substr(6), ' ')) {
            const auto eq = token.find('=');
            if (eq == std::string_view::npos) throw Error(ErrorCode::Parse, "malformed hyper token");
            kv.emplace(std::string(token.substr(0, eq)), std::string(token.substr(eq + 1)));
        }
        auto& h = model.hyperparams;
        h.learning_rate = parse_double(header_value(kv, "learning_rate"));
        h.momentum = parse_double(header_value(kv, "momentum"));
        h.batch_size = parse_int<std::size_t>(header_value(kv, "batch_size"), "batch_size");
        h.iterations = parse_int<std::size_t>(header_value(kv, "iterations"), "iterations");
        h.seed = parse_int<std::uint64_t>(header_value(kv, "seed"), "seed");
        h.hidden = parse_size_list(header_value(kv, "hidden"));
    }

    std::vector<Net::Layer> layers;
    for (std::size_t l = 0; l < n_layers; ++l) {
        if (!next_line(is, line)) throw Error(ErrorCode::Parse, "model is truncated");
        const auto tokens = split(line, ' ');
        if (tokens.size() != 4 || tokens[0] != "layer" || parse_int<std::size_t>(tokens[1], "layer") != l ||
            !tokens[2].starts_with("rows=") || !tokens[3].starts_with("cols=")) {
            throw Error(ErrorCode::Parse, "malformed layer line '" + line + "'");
        }
        const auto rows = parse_int<Eigen::Index>(tokens[2].substr(5), "rows");
        const auto cols = parse_int<Eigen::Index>(tokens[3].substr(5), "cols");
        Net::Layer layer{Net::Matrix(rows, cols), Net::Vector(rows)};
        for (Eigen::Index r = 0; r < rows; ++r) {
            if (!next_line(is, line) || !line.starts_with("w\t")) throw Error(ErrorCode::Parse, "missing weight row");
            const auto values = split(std::string_view(line).substr(2), ',');
            if (static_cast<Eigen::Index>(values.size()) != cols) throw Error(ErrorCode::Parse, "weight row has the wrong length");
            for (Eigen::Index c = 0; c < cols; ++c) layer.weights(r, c) = parse_float(values[static_cast<std::size_t>(c)]);
        }
        if (!next_line(is, line) || !line.starts_with("b\t")) throw Error(ErrorCode::Parse, "missing bias row");
        const auto values = split(std::string_view(line).substr(2), ',');
        if (static_cast<Eigen::Index>(values.size()) != rows) throw Error(ErrorCode::Parse, "bias row has the wrong length");
        for (Eigen::Index r = 0; r < rows; ++r) layer.bias(r) = parse_float(values[static_cast<std::size_t>(r)]);
        layers.push_back(std::move(layer));
    }
    model.network = Net(std::move(layers));
    if (model.input_dim() != input_dim) throw Error(ErrorCode::Parse, "input_dim contradicts the first layer");
    if (!model.network.all_finite()) throw Error(ErrorCode::NonFinite, "model contains non-finite weights");
    return model;
}

void write_loss_csv(std::ostream& os, std::span<const double> batch_losses) {
    os << "iteration,loss\n";
    for (std::size_t i = 0; i < batch_losses.size(); ++i) os << i << ',' << format_real(batch_losses[i]) << '\n';
}

void write_metrics_header(std::ostream& os) {
    os << "name,n,tp,fp,tn,fn,accuracy,precision,recall,f1,roc_auc\n";
}

void write_metrics_row(std::ostream& os, std::string_view name, const MetricsReport& r) {
    os << name << ',' << r.counts.total() << ',' << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.tn << ','
       << r.counts.fn << ',' << format_real(r.accuracy) << ',' << format_real(r.precision) << ','
       << format_real(r.recall) << ',' << format_real(r.f1) << ',' << format_real(r.roc_auc) << '\n';
}

void write_roc_csv(std::ostream& os, std::span<const RocPoint> points) {
    os << "false_positive_rate,true_positive_rate\n";
    for (const auto& p : points) os << format_real(p.false_positive_rate) << ',' << format_real(p.true_positive_rate) << '\n';
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

namespace {

template <typename Reader>
auto load_with(const std::filesystem::path& path, Reader reader) {
    std::istringstream in(read_text_file(path));
    try {
        return reader(in);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

}  // namespace

ExpertIndex load_expert_index(const std::filesystem::path& path) {
    return load_with(path, [](std::istream& in) { return read_expert_index(in); });
}

QueryFile load_queries(const std::filesystem::path& path) {
    return load_with(path, [](std::istream& in) { return read_queries(in); });
}

FeatureDataset load_feature_dataset(const std::filesystem::path& path) {
    return load_with(path, [](std::istream& in) { return read_feature_dataset(in); });
}

DetectorModel load_detector(const std::filesystem::path& path) {
    return load_with(path, [](std::istream& in) { return read_detector(in); });
}

}  // namespace meaad
