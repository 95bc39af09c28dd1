#pragma once

#include <string>
#include <utility>
#include <vector>

#include "supercm/data.hpp"
#include "supercm/metrics.hpp"
#include "supercm/trainer.hpp"

namespace supercm {

// All writers emit complete file contents as strings so outputs are
// byte-deterministic and unit-testable without touching the filesystem.
// Reals are printed with %.17g: enough digits to round-trip a double.

std::string format_real(real v);

// Header: iter,ce,cm_recon,cm_var,cm_cross,cm_dirichlet,ssl,total,lr
std::string run_csv(const RunRecord& record);

// Header: iter,split,accuracy — the periodic validation curve.
std::string evals_csv(const RunRecord& record);

// key=value lines in the given order.
std::string summary_text(
    const std::vector<std::pair<std::string, std::string>>& entries);

// Header: x,y,pred,confidence
std::string grid_csv(const std::vector<GridPoint>& grid);

// Header: feature_0..feature_{d-1},label,split,labeled_flag
std::string features_csv(const Dataset& ds,
                         const std::vector<std::size_t>& labeled);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Textual checkpoint of backbone + clustering module; load_models inverts
// save_models exactly (%.17g round-trips every double).
std::string serialize_models(const Models& models);
Models deserialize_models(const std::string& text);
void save_models(const std::string& path, const Models& models);
Models load_models(const std::string& path);

}  // namespace supercm
