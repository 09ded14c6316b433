#ifndef SVSPEC_JSON_IO_HPP
#define SVSPEC_JSON_IO_HPP

#include <string>

#include "svspec/spectraldata.hpp"

namespace svspec {

std::string dataset_to_json_text(const SpectralDataset& ds, const TailDiagnostics* tails = nullptr);
SpectralDataset dataset_from_json_text(const std::string& text);
void save_dataset(const SpectralDataset& ds, const std::string& path,
                  const TailDiagnostics* tails = nullptr);
SpectralDataset load_dataset(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace svspec

#endif
