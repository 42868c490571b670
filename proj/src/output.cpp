#include "spdc/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spdc/errors.hpp"

namespace spdc {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

ResultTable::ResultTable(std::string kind, std::vector<std::string> columns)
    : kind_(std::move(kind)), columns_(std::move(columns)) {}

void ResultTable::add_meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }

void ResultTable::add_meta(const std::string& key, double value) { meta_.emplace_back(key, format_number(value)); }

void ResultTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size())
        throw std::logic_error(kind_ + " row has " + std::to_string(row.size()) + " cells, expected " +
                               std::to_string(columns_.size()));
    rows_.push_back(std::move(row));
}

double ResultTable::number(std::size_t row, const std::string& column) const {
    const auto it = std::find(columns_.begin(), columns_.end(), column);
    if (it == columns_.end()) throw std::out_of_range("no column " + column);
    const Cell& c = rows_.at(row)[static_cast<std::size_t>(it - columns_.begin())];
    if (const double* d = std::get_if<double>(&c)) return *d;
    if (const long long* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
    throw std::invalid_argument("column " + column + " is not numeric");
}

namespace {

std::string cell_text(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return format_number(*d);
    if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + '"';
}

}  // namespace

void ResultTable::write(std::ostream& os) const {
    os << "# schema: spdc-" << kind_ << "/" << kCsvSchemaVersion << "\n";
    for (const auto& [k, v] : meta_) os << "# " << k << ": " << v << "\n";
    for (std::size_t j = 0; j < columns_.size(); ++j) os << (j ? "," : "") << columns_[j];
    os << "\n";
    for (const auto& row : rows_) {
        for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << cell_text(row[j]);
        os << "\n";
    }
}

void ResultTable::write(const std::filesystem::path& path) const {
    std::ostringstream os;
    write(os);
    write_text(path, os.str());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << text;
}

namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

struct Scale {
    double lo, hi;
    bool log;
    double map(double v, double a, double b) const {
        const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                             : (v - lo) / (hi - lo);
        return a + t * (b - a);
    }
};

Scale make_scale(const std::vector<double>& v, bool log) {
    double lo = 1e300, hi = -1e300;
    for (double x : v)
        if (std::isfinite(x) && (!log || x > 0)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    if (lo > hi) lo = hi = log ? 1.0 : 0.0;
    if (hi == lo) {
        const double pad = log ? 0.0 : (lo == 0 ? 1.0 : 0.05 * std::abs(lo));
        lo -= pad;
        hi += pad;
        if (log) {
            lo /= 1.1;
            hi *= 1.1;
        }
    }
    return {lo, hi, log};
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

void frame(std::ostringstream& os, const PlotAxes& axes, const Scale& sx, const Scale& sy) {
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
       << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(axes.title)
       << "</text>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
       << escape(axes.x_label) << "</text>\n";
    os << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
       << kHeight / 2 << ")\">" << escape(axes.y_label) << "</text>\n";
    for (int t = 0; t <= 4; ++t) {
        const double f = t / 4.0;
        const double xv = sx.log ? std::pow(10.0, std::log10(sx.lo) + f * (std::log10(sx.hi) - std::log10(sx.lo)))
                                 : sx.lo + f * (sx.hi - sx.lo);
        const double yv = sy.log ? std::pow(10.0, std::log10(sy.lo) + f * (std::log10(sy.hi) - std::log10(sy.lo)))
                                 : sy.lo + f * (sy.hi - sy.lo);
        const double px = kLeft + f * (kWidth - kLeft - kRight);
        const double py = kHeight - kBottom - f * (kHeight - kTop - kBottom);
        char bx[32], by[32];
        std::snprintf(bx, sizeof bx, "%.4g", xv);
        std::snprintf(by, sizeof by, "%.4g", yv);
        os << "<text x=\"" << px << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
           << bx << "</text>\n";
        os << "<text x=\"" << kLeft - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << by
           << "</text>\n";
    }
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string svg_line_plot(const std::vector<PlotSeries>& series, const PlotAxes& axes) {
    std::vector<double> xs, ys;
    for (const auto& s : series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        ys.insert(ys.end(), s.y.begin(), s.y.end());
    }
    const Scale sx = make_scale(xs, axes.log_x), sy = make_scale(ys, axes.log_y);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    frame(os, axes, sx, sy);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % 6];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
            if ((axes.log_x && s.x[j] <= 0) || (axes.log_y && s.y[j] <= 0)) continue;
            os << sx.map(s.x[j], kLeft, kWidth - kRight) << "," << sy.map(s.y[j], kHeight - kBottom, kTop) << " ";
        }
        os << "\"/>\n";
        if (!s.label.empty())
            os << "<text x=\"" << kLeft + 10 << "\" y=\"" << kTop + 16 + 15 * k << "\" font-size=\"12\" fill=\"" << color
               << "\">" << escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_heatmap(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<std::vector<double>>& z, const PlotAxes& axes) {
    if (z.size() != y.size()) throw std::invalid_argument("heatmap rows must match y");
    double lo = 1e300, hi = -1e300;
    for (const auto& row : z) {
        if (row.size() != x.size()) throw std::invalid_argument("heatmap columns must match x");
        for (double v : row) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const Scale sx = make_scale(x, false), sy = make_scale(y, false);
    const double cw = (kWidth - kLeft - kRight) / std::max<std::size_t>(1, x.size());
    const double ch = (kHeight - kTop - kBottom) / std::max<std::size_t>(1, y.size());
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t r = 0; r < y.size(); ++r)
        for (std::size_t c = 0; c < x.size(); ++c) {
            const double t = (z[r][c] - lo) / (hi - lo);
            // Dark blue to yellow.
            const int red = static_cast<int>(255 * t), green = static_cast<int>(40 + 200 * t),
                      blue = static_cast<int>(120 * (1 - t));
            os << "<rect x=\"" << kLeft + c * cw << "\" y=\"" << kHeight - kBottom - (r + 1) * ch << "\" width=\""
               << cw + 0.5 << "\" height=\"" << ch + 0.5 << "\" fill=\"rgb(" << red << "," << green << "," << blue
               << ")\"/>\n";
        }
    frame(os, axes, sx, sy);
    os << "</svg>\n";
    return os.str();
}

}  // namespace spdc
