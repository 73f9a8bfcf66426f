#include "rcp/csv.hpp"

#include <cstdio>

namespace rcp {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

void write_surface_csv(CsvWriter& writer, const ValueSurface& surface) {
    const Grid1D& g = surface.grid;
    std::vector<std::string> header;
    header.reserve(static_cast<std::size_t>(g.n_space) + 1);
    header.push_back("t\\p");
    for (int j = 0; j < g.n_space; ++j) header.push_back(format_double(g.node(j)));
    writer.row(header);
    for (int k = 0; k <= g.n_time; ++k)
        writer.numeric_row(surface.row(k), format_double(g.time(k)));
}

void write_surface_csv(const std::string& path, const ValueSurface& surface) {
    CsvWriter writer(path);
    write_surface_csv(writer, surface);
}

} // namespace rcp
