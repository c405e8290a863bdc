#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "htp/categorize.hpp"
#include "htp/types.hpp"

namespace htp {

enum class ColumnOrder { alphabetical, by_prevalence };

// Binary disease x category matrix with a chosen column order. Rows are
// always ascending MIM; by_prevalence sorts columns by descending
// column sum with alphabetical tie-break.
struct HeatmapMatrix {
    std::vector<MimNumber> row_labels;
    std::vector<int> columns; // canonical category indices, display order
    std::vector<std::vector<std::uint8_t>> cells; // [row][column]
    ColumnOrder order = ColumnOrder::alphabetical;
};

HeatmapMatrix build_heatmap(const VectorTable& vectors, ColumnOrder order);

// Two-dimensional PCA of the binary disease vectors. Components are the
// top-2 eigenvectors of the sample covariance (divisor n-1), each
// oriented so its largest-magnitude loading is positive.
struct Projection2D {
    std::vector<MimNumber> mims;
    std::vector<std::array<double, 2>> points;
    std::array<std::array<double, kCategoryCount>, 2> components{};
    std::array<double, 2> explained_variance{};
    std::array<double, kCategoryCount> mean{};
};

Projection2D pca_project(const VectorTable& vectors);

struct SeriesCentroid {
    PhenotypicSeriesId series;
    double x = 0.0;
    double y = 0.0;
    int member_count = 0;
};

// Per-series mean position. Membership must cover exactly the projected
// diseases.
std::vector<SeriesCentroid> centroids(const Projection2D& projection,
                                      const std::map<MimNumber, PhenotypicSeriesId>& membership);

// Deterministic SVG output: one rect per cell, red (#d62728) for
// present, blue (#1f77b4) for absent.
void render_heatmap_svg(const HeatmapMatrix& matrix, const std::filesystem::path& path);

// Round markers per disease colored by series, an X per centroid, and a
// series legend. At most 5 series.
void render_scatter_svg(const Projection2D& projection,
                        const std::map<MimNumber, PhenotypicSeriesId>& membership,
                        const std::vector<SeriesCentroid>& selected,
                        const std::filesystem::path& path);

// Descending count, alphabetical tie-break.
struct FrequencyTable {
    std::vector<std::pair<std::string, int>> rows;
};

FrequencyTable term_frequencies(const std::vector<std::vector<Sign>>& signs_per_disease);
FrequencyTable category_frequencies(const std::vector<CategorizedSigns>& categorized_per_disease);

void write_heatmap_csv(const HeatmapMatrix& matrix, std::ostream& out);
void write_frequency_csv(const FrequencyTable& table, std::string_view value_header,
                         std::ostream& out);
void write_points_csv(const Projection2D& projection,
                      const std::map<MimNumber, PhenotypicSeriesId>& membership, std::ostream& out);
void write_centroids_csv(const std::vector<SeriesCentroid>& centroids, std::ostream& out);

} // namespace htp
