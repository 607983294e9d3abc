#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "meaad/detector.hpp"
#include "meaad/embedding.hpp"
#include "meaad/metrics.hpp"

namespace meaad {

// Line-oriented text artifacts. Every file starts with `<MAGIC> v1 key=value...`;
// readers reject other versions. Reals are written as the shortest decimal
// that round-trips to the same binary value.

std::string format_real(double x);
std::string format_real(float x);
double parse_double(std::string_view text);
float parse_float(std::string_view text);

// Embedding table: `MEAAD-EMB v1 dim=<D> expert=<id>`, then
// `item_id<TAB>identity_id<TAB>v1,...,vD` per item.
void write_expert_index(std::ostream& os, const ExpertIndex& index);
ExpertIndex read_expert_index(std::istream& is);

// Queries: `MEAAD-QRY v1 dim=<D> experts=<N>`, then
// `query_id<TAB>identity_id<TAB>label<TAB>e0;e1;...` with comma-separated embeddings.
struct QueryFile {
    std::size_t dimension = 0;
    std::size_t n_experts = 0;
    std::vector<QuerySample> queries;
};
void write_queries(std::ostream& os, std::span<const QuerySample> queries, std::size_t dimension,
                   std::size_t n_experts);
QueryFile read_queries(std::istream& is);

// Features: `MEAAD-FEAT v1 n=<N> k=<K> d=<d>`, then `query_id<TAB>label<TAB>f1,...,fd`
// with label 0 (benign) or 1 (adversarial).
void write_feature_dataset(std::ostream& os, const FeatureDataset& dataset);
FeatureDataset read_feature_dataset(std::istream& is);

// Detector: header, hyperparameters, then per layer its shape and row-major weights.
void write_detector(std::ostream& os, const DetectorModel& model);
DetectorModel read_detector(std::istream& is);

// CSV reports.
void write_loss_csv(std::ostream& os, std::span<const double> batch_losses);
void write_metrics_header(std::ostream& os);
void write_metrics_row(std::ostream& os, std::string_view name, const MetricsReport& report);
void write_roc_csv(std::ostream& os, std::span<const RocPoint> points);

// File helpers that map stream failures to Io errors.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

ExpertIndex load_expert_index(const std::filesystem::path& path);
QueryFile load_queries(const std::filesystem::path& path);
FeatureDataset load_feature_dataset(const std::filesystem::path& path);
DetectorModel load_detector(const std::filesystem::path& path);

}  // namespace meaad
