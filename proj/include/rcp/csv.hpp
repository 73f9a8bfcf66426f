#ifndef RCP_CSV_HPP
#define RCP_CSV_HPP

#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "rcp/errors.hpp"
#include "rcp/pde.hpp"

namespace rcp {

// Shortest round-trippable decimal form; used for every serialized double so
// reruns are byte-identical.
std::string format_double(double x);

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw ConfigError("cannot open " + path + " for writing");
    }

    void row(std::span<const std::string> cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    void row(std::initializer_list<std::string> cells) {
        row(std::span<const std::string>(cells.begin(), cells.size()));
    }

    void numeric_row(std::span<const double> values, const std::string& prefix = "") {
        if (!prefix.empty()) out_ << prefix << ',';
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_double(values[i]);
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

// Matrix layout: header row "t\\p" followed by the space nodes, then one row
// per time level starting with t_k.
void write_surface_csv(CsvWriter& writer, const ValueSurface& surface);
void write_surface_csv(const std::string& path, const ValueSurface& surface);

} // namespace rcp

#endif
