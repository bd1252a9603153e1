#include "qdep/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qdep {

std::vector<Matrix> heatmap_matrices(const ObservedSeries& series, const LevelGrid& grid,
                                     const std::vector<int>& lags) {
    std::vector<int> sorted = lags;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const CQGramTable table = cqgram_table_at(series, grid, sorted);

    std::vector<Matrix> out;
    for (int k : lags) {
        const auto pos = static_cast<std::size_t>(std::find(sorted.begin(), sorted.end(), k) - sorted.begin());
        Matrix m(static_cast<Eigen::Index>(table.n1()), static_cast<Eigen::Index>(table.n2()));
        for (std::size_t i = 0; i < table.n1(); ++i) {
            for (std::size_t j = 0; j < table.n2(); ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = table.at(i, j, pos);
            }
        }
        out.push_back(std::move(m));
    }
    return out;
}

Matrix heatmap_matrix(const ObservedSeries& series, const LevelGrid& grid, int k) {
    return heatmap_matrices(series, grid, {k}).front();
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_heatmap_csv(const std::string& path, const Matrix& values, const LevelGrid& grid) {
    if (values.rows() != static_cast<Eigen::Index>(grid.taus1.size()) ||
        values.cols() != static_cast<Eigen::Index>(grid.taus2.size())) {
        throw DimensionMismatch("heatmap: matrix shape does not match the grid");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "tau1\\tau2";
    for (double t : grid.taus2) out << ',' << num(t);
    out << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        out << num(grid.taus1[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < values.cols(); ++j) out << ',' << num(values(i, j));
        out << '\n';
    }
}

HeatmapFile read_heatmap_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty heatmap file");
    const auto header = split(line);
    std::vector<double> taus2;
    for (std::size_t j = 1; j < header.size(); ++j) taus2.push_back(std::stod(header[j]));

    std::vector<double> taus1;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) throw std::runtime_error(path + ": ragged heatmap row");
        taus1.push_back(std::stod(cells[0]));
        std::vector<double> row;
        for (std::size_t j = 1; j < cells.size(); ++j) row.push_back(std::stod(cells[j]));
        rows.push_back(std::move(row));
    }
    HeatmapFile file;
    file.grid = LevelGrid(taus1, taus2);
    file.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(taus2.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < taus2.size(); ++j) {
            file.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return file;
}

void write_heatmap_svg(const std::string& path, const Matrix& values, const LevelGrid& grid,
                       const std::string& title) {
    constexpr int cell = 20;
    constexpr int margin = 50;
    const auto rows = static_cast<int>(values.rows());
    const auto cols = static_cast<int>(values.cols());
    double scale = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (std::isfinite(values.data()[i])) scale = std::max(scale, std::abs(values.data()[i]));
    }
    if (scale == 0.0) scale = 1.0;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    const int width = 2 * margin + cols * cell;
    const int height = 2 * margin + rows * cell;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"9\">\n";
    out << "<text x=\"" << margin << "\" y=\"20\" font-size=\"12\">" << title << " (|max| = " << num(scale)
        << ")</text>\n";
    // Highest target level on top.
    for (int i = 0; i < rows; ++i) {
        const int y = margin + (rows - 1 - i) * cell;
        for (int j = 0; j < cols; ++j) {
            const double v = values(i, j);
            int r = 200;
            int g = 200;
            int b = 200;
            if (std::isfinite(v)) {
                const double s = std::clamp(std::abs(v) / scale, 0.0, 1.0);
                const int fade = static_cast<int>(std::lround(255.0 * (1.0 - s)));
                r = v >= 0 ? 255 : fade;
                b = v >= 0 ? fade : 255;
                g = fade;
            }
            out << "<rect x=\"" << margin + j * cell << "\" y=\"" << y << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"rgb(" << r << ',' << g << ',' << b << ")\"/>\n";
        }
        char label[16];
        std::snprintf(label, sizeof label, "%.2f", grid.taus1[static_cast<std::size_t>(i)]);
        out << "<text x=\"4\" y=\"" << y + cell - 6 << "\">" << label << "</text>\n";
    }
    for (int j = 0; j < cols; j += 2) {
        char label[16];
        std::snprintf(label, sizeof label, "%.2f", grid.taus2[static_cast<std::size_t>(j)]);
        out << "<text x=\"" << margin + j * cell << "\" y=\"" << margin + rows * cell + 14 << "\">" << label
            << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace qdep
