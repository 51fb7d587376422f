#ifndef VARSEL_IO_HPP
#define VARSEL_IO_HPP

#include "varsel/core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace varsel {

struct LabeledMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> names;
};

struct LoadOptions {
    // Unset: a first line with any non-numeric field is a header.
    std::optional<bool> header;
    // 0: comma or tab, detected from the first line.
    char delimiter = 0;
};

LabeledMatrix load_matrix(const std::string &path, const LoadOptions &opts = {});
LabeledMatrix parse_matrix(std::string_view text, const LoadOptions &opts = {});

/// Splits one line on the delimiter; no quoting.
std::vector<std::string> split_fields(std::string_view line, char delimiter);

std::string read_file(const std::string &path);
void write_file(const std::string &path, std::string_view contents);

/// Everything a fit leaves behind. Text reports are derived from this.
struct FitArchive {
    static constexpr std::int64_t kFormatVersion = 1;

    std::int64_t format_version = kFormatVersion;
    ModelFit fit;
    HyperGrid grid;            // the grid as requested
    std::string design_digest;  // X and Z only
    std::int64_t n = 0;
    std::int64_t m = 0;        // covariates including the intercept
    bool fitted_sigma = false;
    bool fitted_sa = false;
    bool fitted_eta = false;
    std::vector<std::string> variable_names;
    std::string options_json;
};

std::string serialize_archive(const FitArchive &archive);
FitArchive deserialize_archive(std::string_view bytes);

void save_archive(const FitArchive &archive, const std::string &path);
FitArchive load_archive(const std::string &path);

}  // namespace varsel

#endif
