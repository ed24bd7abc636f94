#include "selfi/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "selfi/errors.hpp"

namespace selfi {

std::string format_double(double v) {
    // Try successively longer forms; take the first that round-trips.
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return std::string(buf);
}

std::string grid_to_csv(const GridResult& grid) {
    std::string out = "train\\test";
    for (const std::string& m : grid.methods) out += "," + m;
    out += "\n";
    for (std::size_t i = 0; i < grid.methods.size(); ++i) {
        out += grid.methods[i];
        for (std::size_t j = 0; j < grid.methods.size(); ++j) {
            out += "," + format_double(grid.auc.at(i, j));
        }
        out += "\n";
    }
    return out;
}

namespace {

// Linear ramp anchored at AUC 0.5 (light) and 1.0 (dark blue), clamped.
std::string ramp_color(double auc) {
    const double t = std::clamp((auc - 0.5) / 0.5, 0.0, 1.0);
    const auto mix = [&](int lo, int hi) {
        return static_cast<int>(std::lround(lo + t * (hi - lo)));
    };
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", mix(0xf7, 0x08), mix(0xfb, 0x51),
                  mix(0xff, 0x9c));
    return std::string(buf);
}

}  // namespace

std::string grid_to_svg(const GridResult& grid) {
    const int cell = 72;
    const int margin = 96;
    const std::size_t n = grid.methods.size();
    const int width = margin + cell * static_cast<int>(n) + 16;
    const int height = margin + cell * static_cast<int>(n) + 16;

    std::string svg;
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                  "font-family=\"monospace\" font-size=\"12\">\n",
                  width, height);
    svg += buf;
    svg += "<text x=\"8\" y=\"16\">cross-manipulation AUC (rows: train, cols: test)</text>\n";

    for (std::size_t j = 0; j < n; ++j) {
        std::snprintf(buf, sizeof(buf), "<text x=\"%d\" y=\"%d\" text-anchor=\"middle\">%s</text>\n",
                      margin + static_cast<int>(j) * cell + cell / 2, margin - 10,
                      grid.methods[j].c_str());
        svg += buf;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "<text x=\"%d\" y=\"%d\" text-anchor=\"end\">%s</text>\n",
                      margin - 8, margin + static_cast<int>(i) * cell + cell / 2 + 4,
                      grid.methods[i].c_str());
        svg += buf;
        for (std::size_t j = 0; j < n; ++j) {
            const double auc = grid.auc.at(i, j);
            const int x = margin + static_cast<int>(j) * cell;
            const int y = margin + static_cast<int>(i) * cell;
            std::snprintf(buf, sizeof(buf),
                          "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\" "
                          "stroke=\"#333\"/>\n",
                          x, y, cell, cell, ramp_color(auc).c_str());
            svg += buf;
            const char* text_fill = auc >= 0.78 ? "#ffffff" : "#111111";
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%d\" y=\"%d\" text-anchor=\"middle\" fill=\"%s\">%.3f</text>\n",
                          x + cell / 2, y + cell / 2 + 4, text_fill, auc);
            svg += buf;
        }
    }
    svg += "</svg>\n";
    return svg;
}

std::string history_to_csv(const std::vector<EpochStats>& history) {
    std::string out = "epoch,train_loss,train_acc,val_auc\n";
    for (std::size_t i = 0; i < history.size(); ++i) {
        out += std::to_string(i + 1) + "," + format_double(history[i].train_loss) + "," +
               format_double(history[i].train_acc) + "," + format_double(history[i].val_auc) +
               "\n";
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace selfi
