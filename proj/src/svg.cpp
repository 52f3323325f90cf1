#include "pipecomm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pipecomm/errors.hpp"

namespace pipecomm {

namespace {

std::string fmt(const char* f, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Rgb {
    int r, g, b;
};

// light-to-dark blue ramp, t in [0,1]
Rgb ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const Rgb lo{247, 251, 255}, hi{8, 48, 107};
    auto mix = [t](int a, int b) { return int(std::lround(a + t * (b - a))); };
    return {mix(lo.r, hi.r), mix(lo.g, hi.g), mix(lo.b, hi.b)};
}

std::string hex(const Rgb& c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

} // namespace

std::string render_heatmap(const std::vector<double>& matrix, std::size_t n,
                           const std::vector<std::string>& labels, const HeatmapOptions& opt) {
    if (labels.size() != n || matrix.size() != n * n)
        throw Error(Errc::node_set_mismatch, "heatmap needs a square labeled matrix");
    std::vector<int> order(opt.order);
    if (order.empty()) {
        order.resize(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = int(i);
    }
    if (order.size() != n)
        throw Error(Errc::node_set_mismatch, "display order length does not match matrix");

    double lo = matrix[0], hi = matrix[0];
    for (double v : matrix) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;

    const int cell = 30;
    const int gutter = 112; // label columns
    const int top = opt.title.empty() ? gutter : gutter + 20;
    const int title_y = 24;
    const int legend_w = 16, legend_gap = 18, legend_text = 64;
    const int width = gutter + int(n) * cell + legend_gap + legend_w + legend_text + 8;
    const int height = top + int(n) * cell + 12;

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    s << "<defs><linearGradient id=\"scale\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">"
      << "<stop offset=\"0\" stop-color=\"" << hex(ramp(0.0)) << "\"/>"
      << "<stop offset=\"1\" stop-color=\"" << hex(ramp(1.0)) << "\"/>"
      << "</linearGradient></defs>\n";
    s << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
    s << "<g font-family=\"monospace\">\n";
    if (!opt.title.empty())
        s << "<text x=\"" << gutter + int(n) * cell / 2 << "\" y=\"" << title_y
          << "\" font-size=\"14\" text-anchor=\"middle\">" << esc(opt.title) << "</text>\n";

    for (std::size_t row = 0; row < n; ++row) {
        const int src_i = order[row];
        const int y = top + int(row) * cell;
        for (std::size_t col = 0; col < n; ++col) {
            const int src_j = order[col];
            const double v = matrix[std::size_t(src_i) * n + std::size_t(src_j)];
            const double t = (v - lo) / span;
            const int x = gutter + int(col) * cell;
            s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\""
              << cell << "\" fill=\"" << hex(ramp(t)) << "\"/>\n";
            const char* text_fill = t > 0.55 ? "#ffffff" : "#000000";
            s << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 3
              << "\" font-size=\"8\" text-anchor=\"middle\" fill=\"" << text_fill << "\">"
              << (opt.integer_values ? fmt("%.0f", v) : fmt("%.2f", v)) << "</text>\n";
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const std::string& lab = labels[std::size_t(order[i])];
        s << "<text x=\"" << gutter - 6 << "\" y=\"" << top + int(i) * cell + cell / 2 + 3
          << "\" font-size=\"9\" text-anchor=\"end\">" << esc(lab) << "</text>\n";
        const int x = gutter + int(i) * cell + cell / 2 + 3;
        s << "<text x=\"" << x << "\" y=\"" << top - 6 << "\" font-size=\"9\" text-anchor=\"start\""
          << " transform=\"rotate(-90 " << x << " " << top - 6 << ")\">" << esc(lab)
          << "</text>\n";
    }

    if (!opt.block_of.empty() && opt.block_of.size() == n) {
        for (std::size_t i = 1; i < n; ++i)
            if (opt.block_of[std::size_t(order[i])] != opt.block_of[std::size_t(order[i - 1])]) {
                const int p = int(i) * cell;
                s << "<line x1=\"" << gutter << "\" y1=\"" << top + p << "\" x2=\""
                  << gutter + int(n) * cell << "\" y2=\"" << top + p
                  << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
                s << "<line x1=\"" << gutter + p << "\" y1=\"" << top << "\" x2=\"" << gutter + p
                  << "\" y2=\"" << top + int(n) * cell
                  << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
            }
    }

    const int lx = gutter + int(n) * cell + legend_gap;
    s << "<rect x=\"" << lx << "\" y=\"" << top << "\" width=\"" << legend_w << "\" height=\""
      << int(n) * cell << "\" fill=\"url(#scale)\" stroke=\"#000000\"/>\n";
    s << "<text x=\"" << lx + legend_w + 4 << "\" y=\"" << top + 8 << "\" font-size=\"10\">"
      << fmt("%.6g", hi) << "</text>\n";
    s << "<text x=\"" << lx + legend_w + 4 << "\" y=\"" << top + int(n) * cell << "\" font-size=\"10\">"
      << fmt("%.6g", lo) << "</text>\n";
    s << "</g>\n</svg>\n";
    return s.str();
}

void write_heatmap(const std::vector<double>& matrix, std::size_t n,
                   const std::vector<std::string>& labels, const HeatmapOptions& opt,
                   const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(Errc::io_error, "cannot open " + path + " for writing");
    os << render_heatmap(matrix, n, labels, opt);
    if (!os) throw Error(Errc::io_error, "write failed for " + path);
}

} // namespace pipecomm
