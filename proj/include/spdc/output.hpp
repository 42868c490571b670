#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace spdc {

inline constexpr int kCsvSchemaVersion = 1;

using Cell = std::variant<double, long long, std::string>;

// CSV table with '#'-prefixed metadata lines and a fixed column order.
class ResultTable {
public:
    ResultTable(std::string kind, std::vector<std::string> columns);

    const std::string& kind() const { return kind_; }
    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t rows() const { return rows_.size(); }

    void add_meta(const std::string& key, const std::string& value);
    void add_meta(const std::string& key, double value);
    void add_row(std::vector<Cell> row);
    double number(std::size_t row, const std::string& column) const;

    void write(std::ostream& os) const;
    void write(const std::filesystem::path& path) const;

private:
    std::string kind_;
    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::vector<Cell>> rows_;
};

// Shortest round-trip-safe text for CSV output (%.10g).
std::string format_number(double v);

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};

struct PlotAxes {
    std::string title, x_label, y_label;
    bool log_x = false, log_y = false;
};

std::string svg_line_plot(const std::vector<PlotSeries>& series, const PlotAxes& axes);
// Heatmap of z[row][col] over y (rows) and x (columns).
std::string svg_heatmap(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<std::vector<double>>& z, const PlotAxes& axes);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace spdc
