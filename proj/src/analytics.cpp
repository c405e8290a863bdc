#include "htp/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <Eigen/Dense>

#include "htp/text.hpp"

namespace htp {

namespace {

constexpr std::array<const char*, 5> kSeriesPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
};
constexpr const char* kPresentFill = "#d62728";
constexpr const char* kAbsentFill = "#1f77b4";

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    return out;
}

std::string svg_num(double v) {
    return fmt_double(v, 2);
}

} // namespace

HeatmapMatrix build_heatmap(const VectorTable& vectors, ColumnOrder order) {
    if (vectors.rows.empty()) throw ValidationError("heatmap requires at least one disease vector");

    std::vector<DiseaseVector> rows = vectors.rows;
    std::sort(rows.begin(), rows.end(),
              [](const DiseaseVector& a, const DiseaseVector& b) { return a.mim < b.mim; });

    std::array<int, kCategoryCount> sums{};
    for (const DiseaseVector& row : rows) {
        for (int c = 0; c < kCategoryCount; ++c) sums[static_cast<std::size_t>(c)] += row.bits[static_cast<std::size_t>(c)];
    }

    HeatmapMatrix matrix;
    matrix.order = order;
    matrix.columns.resize(kCategoryCount);
    for (int c = 0; c < kCategoryCount; ++c) matrix.columns[static_cast<std::size_t>(c)] = c;
    if (order == ColumnOrder::by_prevalence) {
        // Canonical index doubles as the alphabetical tie-break.
        std::stable_sort(matrix.columns.begin(), matrix.columns.end(), [&](int a, int b) {
            if (sums[static_cast<std::size_t>(a)] != sums[static_cast<std::size_t>(b)]) {
                return sums[static_cast<std::size_t>(a)] > sums[static_cast<std::size_t>(b)];
            }
            return a < b;
        });
    }

    for (const DiseaseVector& row : rows) {
        matrix.row_labels.push_back(row.mim);
        std::vector<std::uint8_t> cells(kCategoryCount);
        for (int c = 0; c < kCategoryCount; ++c) {
            cells[static_cast<std::size_t>(c)] = row.bits[static_cast<std::size_t>(matrix.columns[static_cast<std::size_t>(c)])];
        }
        matrix.cells.push_back(std::move(cells));
    }
    return matrix;
}

Projection2D pca_project(const VectorTable& vectors) {
    const std::size_t n = vectors.rows.size();
    if (n < 3) {
        throw ValidationError("pca requires at least 3 disease vectors, got " + std::to_string(n));
    }

    Eigen::MatrixXd data(static_cast<Eigen::Index>(n), kCategoryCount);
    for (std::size_t r = 0; r < n; ++r) {
        for (int c = 0; c < kCategoryCount; ++c) {
            data(static_cast<Eigen::Index>(r), c) = vectors.rows[r].bits[static_cast<std::size_t>(c)];
        }
    }

    int varying_columns = 0;
    for (int c = 0; c < kCategoryCount; ++c) {
        const double first = data(0, c);
        for (std::size_t r = 1; r < n; ++r) {
            if (data(static_cast<Eigen::Index>(r), c) != first) {
                ++varying_columns;
                break;
            }
        }
    }
    if (varying_columns < 2) {
        throw ValidationError("pca: input has degenerate rank " + std::to_string(varying_columns) +
                              "; need at least 2 columns with non-zero variance");
    }

    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - mean;
    const Eigen::MatrixXd covariance =
        (centered.transpose() * centered) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
    if (solver.info() != Eigen::Success) {
        throw Error("pca: eigendecomposition failed to converge");
    }

    Projection2D projection;
    for (int c = 0; c < kCategoryCount; ++c) projection.mean[static_cast<std::size_t>(c)] = mean(c);

    // Eigenvalues come back ascending; take the top two.
    for (int k = 0; k < 2; ++k) {
        const int src = kCategoryCount - 1 - k;
        projection.explained_variance[static_cast<std::size_t>(k)] =
            std::max(0.0, solver.eigenvalues()(src));
        Eigen::VectorXd component = solver.eigenvectors().col(src);
        // Orient each component so its largest-magnitude loading is
        // positive (lowest index wins exact magnitude ties).
        int pivot = 0;
        for (int c = 1; c < kCategoryCount; ++c) {
            if (std::abs(component(c)) > std::abs(component(pivot))) pivot = c;
        }
        if (component(pivot) < 0.0) component = -component;
        for (int c = 0; c < kCategoryCount; ++c) {
            projection.components[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)] = component(c);
        }
    }

    for (std::size_t r = 0; r < n; ++r) {
        std::array<double, 2> point{};
        for (int k = 0; k < 2; ++k) {
            double dot = 0.0;
            for (int c = 0; c < kCategoryCount; ++c) {
                dot += centered(static_cast<Eigen::Index>(r), c) *
                       projection.components[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
            }
            point[static_cast<std::size_t>(k)] = dot;
        }
        projection.mims.push_back(vectors.rows[r].mim);
        projection.points.push_back(point);
    }
    return projection;
}

std::vector<SeriesCentroid> centroids(const Projection2D& projection,
                                      const std::map<MimNumber, PhenotypicSeriesId>& membership) {
    std::set<MimNumber> projected(projection.mims.begin(), projection.mims.end());
    for (const auto& [mim, series] : membership) {
        if (!projected.count(mim)) {
            throw ValidationError("centroids: membership lists MIM " + mim.str() +
                                  " which is not in the projection");
        }
    }

    std::map<PhenotypicSeriesId, SeriesCentroid> by_series;
    for (std::size_t i = 0; i < projection.mims.size(); ++i) {
        auto it = membership.find(projection.mims[i]);
        if (it == membership.end()) {
            throw ValidationError("centroids: projected MIM " + projection.mims[i].str() +
                                  " has no phenotypic series");
        }
        auto [entry, inserted] = by_series.try_emplace(it->second, SeriesCentroid{it->second, 0, 0, 0});
        entry->second.x += projection.points[i][0];
        entry->second.y += projection.points[i][1];
        entry->second.member_count += 1;
    }

    std::vector<SeriesCentroid> result;
    for (auto& [series, centroid] : by_series) {
        centroid.x /= centroid.member_count;
        centroid.y /= centroid.member_count;
        result.push_back(centroid);
    }
    return result;
}

void render_heatmap_svg(const HeatmapMatrix& matrix, const std::filesystem::path& path) {
    constexpr int cell = 14;
    constexpr int left = 64;
    constexpr int top = 120;
    const int width = left + cell * kCategoryCount + 8;
    const int height = top + cell * static_cast<int>(matrix.row_labels.size()) + 8;

    std::ofstream out = open_output(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\">\n";
    for (std::size_t c = 0; c < matrix.columns.size(); ++c) {
        const std::string& name = category_names()[static_cast<std::size_t>(matrix.columns[c])];
        const int x = left + static_cast<int>(c) * cell + cell / 2;
        out << "<text x=\"" << x << "\" y=\"" << top - 6 << "\" font-size=\"9\" text-anchor=\"start\""
            << " transform=\"rotate(-60 " << x << ' ' << top - 6 << ")\">" << name << "</text>\n";
    }
    for (std::size_t r = 0; r < matrix.row_labels.size(); ++r) {
        const int y = top + static_cast<int>(r) * cell;
        out << "<text x=\"" << left - 6 << "\" y=\"" << y + cell - 4
            << "\" font-size=\"10\" text-anchor=\"end\">" << matrix.row_labels[r].str() << "</text>\n";
        for (std::size_t c = 0; c < matrix.columns.size(); ++c) {
            out << "<rect x=\"" << left + static_cast<int>(c) * cell << "\" y=\"" << y << "\" width=\""
                << cell << "\" height=\"" << cell << "\" fill=\""
                << (matrix.cells[r][c] ? kPresentFill : kAbsentFill) << "\"/>\n";
        }
    }
    out << "</svg>\n";
}

void render_scatter_svg(const Projection2D& projection,
                        const std::map<MimNumber, PhenotypicSeriesId>& membership,
                        const std::vector<SeriesCentroid>& selected,
                        const std::filesystem::path& path) {
    if (selected.size() > 5) {
        throw ValidationError("scatter plot is capped at 5 phenotypic series, got " +
                              std::to_string(selected.size()));
    }

    std::map<PhenotypicSeriesId, std::size_t> color_of;
    std::vector<PhenotypicSeriesId> order;
    for (const SeriesCentroid& centroid : selected) order.push_back(centroid.series);
    std::sort(order.begin(), order.end());
    for (const PhenotypicSeriesId& series : order) color_of.emplace(series, color_of.size());

    // Shown points: diseases belonging to a selected series.
    std::vector<std::size_t> shown;
    double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    bool first = true;
    auto grow = [&](double x, double y) {
        if (first) {
            min_x = max_x = x;
            min_y = max_y = y;
            first = false;
        } else {
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
        }
    };
    for (std::size_t i = 0; i < projection.mims.size(); ++i) {
        auto it = membership.find(projection.mims[i]);
        if (it == membership.end() || !color_of.count(it->second)) continue;
        shown.push_back(i);
        grow(projection.points[i][0], projection.points[i][1]);
    }
    for (const SeriesCentroid& centroid : selected) grow(centroid.x, centroid.y);

    constexpr int width = 640;
    constexpr int height = 480;
    constexpr int margin = 48;
    double span_x = max_x - min_x;
    double span_y = max_y - min_y;
    if (span_x < 1e-9) span_x = 1.0;
    if (span_y < 1e-9) span_y = 1.0;
    auto sx = [&](double x) { return margin + (x - min_x) / span_x * (width - 2 * margin); };
    auto sy = [&](double y) { return height - margin - (y - min_y) / span_y * (height - 2 * margin); };

    std::ofstream out = open_output(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\">\n";
    for (std::size_t i : shown) {
        const PhenotypicSeriesId series = membership.at(projection.mims[i]);
        out << "<circle cx=\"" << svg_num(sx(projection.points[i][0])) << "\" cy=\""
            << svg_num(sy(projection.points[i][1])) << "\" r=\"4\" fill=\""
            << kSeriesPalette[color_of.at(series)] << "\" fill-opacity=\"0.7\"><title>"
            << projection.mims[i].str() << "</title></circle>\n";
    }
    for (const PhenotypicSeriesId& series : order) {
        const SeriesCentroid* centroid = nullptr;
        for (const SeriesCentroid& c : selected) {
            if (c.series == series) centroid = &c;
        }
        const double cx = sx(centroid->x);
        const double cy = sy(centroid->y);
        const char* color = kSeriesPalette[color_of.at(series)];
        out << "<g class=\"centroid\" stroke=\"" << color << "\" stroke-width=\"3\">"
            << "<line x1=\"" << svg_num(cx - 7) << "\" y1=\"" << svg_num(cy - 7) << "\" x2=\""
            << svg_num(cx + 7) << "\" y2=\"" << svg_num(cy + 7) << "\"/>"
            << "<line x1=\"" << svg_num(cx - 7) << "\" y1=\"" << svg_num(cy + 7) << "\" x2=\""
            << svg_num(cx + 7) << "\" y2=\"" << svg_num(cy - 7) << "\"/></g>\n";
    }
    int row = 0;
    for (const PhenotypicSeriesId& series : order) {
        const int y = 20 + row * 18;
        out << "<circle cx=\"" << width - 150 << "\" cy=\"" << y - 4 << "\" r=\"5\" fill=\""
            << kSeriesPalette[color_of.at(series)] << "\"/>"
            << "<text x=\"" << width - 140 << "\" y=\"" << y << "\" font-size=\"12\">" << series.str()
            << "</text>\n";
        ++row;
    }
    out << "</svg>\n";
}

FrequencyTable term_frequencies(const std::vector<std::vector<Sign>>& signs_per_disease) {
    std::map<std::string, int> counts;
    for (const auto& signs : signs_per_disease) {
        for (const Sign& sign : signs) counts[sign.canonical] += 1;
    }
    FrequencyTable table;
    table.rows.assign(counts.begin(), counts.end());
    std::stable_sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return table;
}

FrequencyTable category_frequencies(const std::vector<CategorizedSigns>& categorized_per_disease) {
    std::map<std::string, int> counts;
    for (const CategorizedSigns& categorized : categorized_per_disease) {
        for (const auto& [category, members] : categorized) {
            if (!members.empty()) {
                counts[std::string(category_name(category))] += static_cast<int>(members.size());
            }
        }
    }
    FrequencyTable table;
    table.rows.assign(counts.begin(), counts.end());
    std::stable_sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return table;
}

void write_heatmap_csv(const HeatmapMatrix& matrix, std::ostream& out) {
    out << "mim";
    for (int c : matrix.columns) out << ',' << csv_field(category_names()[static_cast<std::size_t>(c)]);
    out << '\n';
    for (std::size_t r = 0; r < matrix.row_labels.size(); ++r) {
        out << matrix.row_labels[r].str();
        for (std::size_t c = 0; c < matrix.columns.size(); ++c) out << ',' << int(matrix.cells[r][c]);
        out << '\n';
    }
}

void write_frequency_csv(const FrequencyTable& table, std::string_view value_header,
                         std::ostream& out) {
    out << value_header << ",count\n";
    for (const auto& [value, count] : table.rows) {
        out << csv_field(value) << ',' << count << '\n';
    }
}

void write_points_csv(const Projection2D& projection,
                      const std::map<MimNumber, PhenotypicSeriesId>& membership, std::ostream& out) {
    out << "mim,series,x,y\n";
    for (std::size_t i = 0; i < projection.mims.size(); ++i) {
        auto it = membership.find(projection.mims[i]);
        out << projection.mims[i].str() << ',' << (it == membership.end() ? "" : it->second.str())
            << ',' << fmt_double(projection.points[i][0], 6) << ','
            << fmt_double(projection.points[i][1], 6) << '\n';
    }
}

void write_centroids_csv(const std::vector<SeriesCentroid>& centroids, std::ostream& out) {
    out << "series,x,y,member_count\n";
    for (const SeriesCentroid& centroid : centroids) {
        out << centroid.series.str() << ',' << fmt_double(centroid.x, 6) << ','
            << fmt_double(centroid.y, 6) << ',' << centroid.member_count << '\n';
    }
}

} // namespace htp
