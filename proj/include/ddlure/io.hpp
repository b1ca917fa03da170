#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ddlure/constraints.hpp"
#include "ddlure/plant.hpp"
#include "ddlure/synth.hpp"
#include "ddlure/verify.hpp"

namespace ddlure {

namespace fs = std::filesystem;

// "[1, 2; 3, 4]": rows split by ';', entries by ',' or whitespace. The
// brackets are optional. Throws ParseError.
Mat parse_matrix(std::string_view text);
std::string format_matrix(const Mat& m, int precision = 6);

Mat read_csv(const fs::path& path);
void write_csv(const fs::path& path, const Mat& m);

DataSet read_dataset(const fs::path& dir);
void write_dataset(const fs::path& dir, const DataSet& data);

PlantModel model_from_json(std::string_view text);
std::string model_to_json(const PlantModel& model);
PlantModel read_model(const fs::path& path);
void write_model(const fs::path& path, const PlantModel& model);

QuadConstraint constraint_from_json(std::string_view text);
std::string constraint_to_json(const QuadConstraint& c);
QuadConstraint read_constraint(const fs::path& path);
void write_constraint(const fs::path& path, const QuadConstraint& c);

Certificate certificate_from_json(std::string_view text);
std::string certificate_to_json(const Certificate& cert);
Certificate read_certificate(const fs::path& path);
void write_certificate(const fs::path& path, const Certificate& cert);

std::string report_to_json(const VerificationReport& rep);
VerificationReport report_from_json(std::string_view text);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace ddlure
