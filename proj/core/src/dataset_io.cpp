#include <cstdio>

#include "nvmfp/error.hpp"
#include "nvmfp/protocol.hpp"
#include "nvmfp/text_io.hpp"

namespace nvmfp {

namespace {

constexpr std::size_t kMetaColumns = 4;

std::string feature_column(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "f%03zu", i);
  return buf;
}

}  // namespace

std::string format_dataset_csv(const Dataset& ds) {
  ds.validate();
  const std::size_t d = ds.arity();
  std::string out = "class,chip_seed,addr,checkpoint";
  for (std::size_t i = 0; i < d; ++i) {
    out += ',';
    out += feature_column(i);
  }
  out += '\n';
  out.reserve(out.size() + ds.size() * (d * 14 + 48));
  for (const auto& s : ds.samples) {
    out += std::to_string(s.label);
    out += ',';
    out += std::to_string(s.meta.chip_seed);
    out += ',';
    out += std::to_string(s.meta.addr);
    out += ',';
    out += std::to_string(s.meta.checkpoint);
    for (double f : s.features) {
      out += ',';
      out += text::fixed(f, 6);
    }
    out += '\n';
  }
  return out;
}

Dataset parse_dataset_csv(std::string_view content, std::optional<std::size_t> expected_arity) {
  const auto all = text::lines(content);
  if (all.empty()) throw ParseError("dataset is empty (missing header)", 1);

  const auto header = text::split(all[0], ',');
  if (header.size() < kMetaColumns + 1 || header[0] != "class" || header[1] != "chip_seed" ||
      header[2] != "addr" || header[3] != "checkpoint") {
    throw ParseError("expected header 'class,chip_seed,addr,checkpoint,f000,...'", 1);
  }
  const std::size_t d = header.size() - kMetaColumns;
  for (std::size_t i = 0; i < d; ++i) {
    if (header[kMetaColumns + i] != feature_column(i)) {
      throw ParseError("unexpected column '" + std::string(header[kMetaColumns + i]) + "'", 1);
    }
  }
  if (expected_arity && d != *expected_arity) {
    throw ParseError("dataset has " + std::to_string(d) + " feature columns, expected " +
                         std::to_string(*expected_arity),
                     1);
  }

  Dataset ds;
  for (std::size_t li = 1; li < all.size(); ++li) {
    const std::size_t line_no = li + 1;
    if (all[li].empty()) continue;
    const auto cells = text::split(all[li], ',');
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " columns, got " +
                           std::to_string(cells.size()),
                       line_no);
    }
    FeatureVector fv;
    fv.label = static_cast<int>(text::parse_int(cells[0], line_no));
    fv.meta.chip_seed = text::parse_uint(cells[1], line_no);
    fv.meta.addr = static_cast<std::uint32_t>(text::parse_uint(cells[2], line_no));
    fv.meta.checkpoint = text::parse_uint(cells[3], line_no);
    fv.features.resize(d);
    for (std::size_t i = 0; i < d; ++i) fv.features[i] = text::parse_double(cells[kMetaColumns + i], line_no);
    ds.class_names.try_emplace(fv.label, default_class_name(fv.label));
    ds.samples.push_back(std::move(fv));
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  text::write_file_atomic(path, format_dataset_csv(ds));
}

Dataset load_dataset(const std::filesystem::path& path, std::optional<std::size_t> expected_arity) {
  return parse_dataset_csv(text::read_file(path), expected_arity);
}

}  // namespace nvmfp
