#include <algorithm>
#include <array>
#include <set>
#include <sstream>

#include "nvmfp/chipsim.hpp"
#include "nvmfp/error.hpp"
#include "nvmfp/text_io.hpp"

namespace nvmfp {

namespace detail {
extern const std::string_view kBuiltinCatalogText;
}

namespace {

constexpr std::array<std::string_view, 15> kColumns = {
    "class_tag",       "manufacturer",     "capacity_label",   "technology",
    "op_kind",         "num_locations",    "base_latency_us",  "drift_amplitude",
    "drift_exponent",  "drift_ref_cycles", "noise_sigma",      "chip_sigma",
    "loc_sigma",       "step_cycles",      "step_factor"};

std::string header_line() {
  std::string h;
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    if (i) h += ',';
    h += kColumns[i];
  }
  return h;
}

}  // namespace

std::string_view to_string(Technology t) noexcept {
  switch (t) {
    case Technology::NorFlash: return "NOR_FLASH";
    case Technology::Cbram: return "CBRAM";
    case Technology::Rram: return "RRAM";
  }
  return "?";
}

std::string_view to_string(OpKind k) noexcept {
  return k == OpKind::SectorErase ? "SECTOR_ERASE" : "PAGE_WRITE";
}

Technology parse_technology(std::string_view s) {
  if (s == "NOR_FLASH") return Technology::NorFlash;
  if (s == "CBRAM") return Technology::Cbram;
  if (s == "RRAM") return Technology::Rram;
  throw ParseError("unknown technology '" + std::string(s) + "'");
}

OpKind parse_op_kind(std::string_view s) {
  if (s == "SECTOR_ERASE") return OpKind::SectorErase;
  if (s == "PAGE_WRITE") return OpKind::PageWrite;
  throw ParseError("unknown op kind '" + std::string(s) + "'");
}

void validate(const ChipClassSpec& s) {
  const std::string who = "class" + std::to_string(s.class_tag) + ": ";
  if (s.class_tag < 0 || s.class_tag > 8) throw ValidationError(who + "class_tag must be in 0..8");
  if (s.num_locations < 64) throw ValidationError(who + "num_locations must be >= 64");
  if (!(s.base_latency_us > 0.0)) throw ValidationError(who + "base_latency_us must be > 0");
  if (!(s.drift_amplitude >= 0.0)) throw ValidationError(who + "drift_amplitude must be >= 0");
  if (!(s.drift_exponent > 0.0 && s.drift_exponent <= 2.0)) {
    throw ValidationError(who + "drift_exponent must be in (0, 2]");
  }
  if (s.drift_ref_cycles == 0) throw ValidationError(who + "drift_ref_cycles must be > 0");
  if (!(s.noise_sigma >= 0.0 && s.chip_sigma >= 0.0 && s.loc_sigma >= 0.0)) {
    throw ValidationError(who + "sigmas must be >= 0");
  }
  if (s.step_cycles.has_value() != s.step_factor.has_value()) {
    throw ValidationError(who + "step_cycles and step_factor must be given together");
  }
  if (s.step_cycles && *s.step_cycles == 0) throw ValidationError(who + "step_cycles must be > 0");
  if (s.step_factor && !(*s.step_factor >= 1.0)) throw ValidationError(who + "step_factor must be >= 1");
  const bool nor = s.technology == Technology::NorFlash;
  if (nor != (s.op_kind == OpKind::SectorErase)) {
    throw ValidationError(who + "NOR_FLASH uses SECTOR_ERASE; CBRAM/RRAM use PAGE_WRITE");
  }
}

void validate_catalog(const std::vector<ChipClassSpec>& catalog) {
  std::set<int> tags;
  for (const auto& s : catalog) {
    validate(s);
    if (!tags.insert(s.class_tag).second) {
      throw ValidationError("duplicate class_tag " + std::to_string(s.class_tag));
    }
  }
}

std::vector<ChipClassSpec> parse_catalog(std::string_view content) {
  std::vector<ChipClassSpec> out;
  bool seen_header = false;
  const auto all = text::lines(content);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const std::size_t line_no = i + 1;
    std::string_view ln = text::trim(all[i]);
    if (ln.empty() || ln.front() == '#') continue;
    auto cells = text::split(ln, ',');
    for (auto& c : cells) c = text::trim(c);
    if (!seen_header) {
      if (cells.size() != kColumns.size() ||
          !std::equal(cells.begin(), cells.end(), kColumns.begin())) {
        throw ParseError("expected catalog header '" + header_line() + "'", line_no);
      }
      seen_header = true;
      continue;
    }
    if (cells.size() != kColumns.size()) {
      throw ParseError("expected " + std::to_string(kColumns.size()) + " fields, got " +
                           std::to_string(cells.size()),
                       line_no);
    }
    ChipClassSpec s;
    try {
      s.class_tag = static_cast<int>(text::parse_int(cells[0], line_no));
      s.manufacturer = std::string(cells[1]);
      s.capacity_label = std::string(cells[2]);
      s.technology = parse_technology(cells[3]);
      s.op_kind = parse_op_kind(cells[4]);
      s.num_locations = static_cast<std::uint32_t>(text::parse_uint(cells[5], line_no));
      s.base_latency_us = text::parse_double(cells[6], line_no);
      s.drift_amplitude = text::parse_double(cells[7], line_no);
      s.drift_exponent = text::parse_double(cells[8], line_no);
      s.drift_ref_cycles = text::parse_uint(cells[9], line_no);
      s.noise_sigma = text::parse_double(cells[10], line_no);
      s.chip_sigma = text::parse_double(cells[11], line_no);
      s.loc_sigma = text::parse_double(cells[12], line_no);
      if (!cells[13].empty()) s.step_cycles = text::parse_uint(cells[13], line_no);
      if (!cells[14].empty()) s.step_factor = text::parse_double(cells[14], line_no);
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(e.what(), line_no);
    }
    try {
      validate(s);
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  if (!seen_header) throw ParseError("catalog is empty (missing header)");
  validate_catalog(out);
  return out;
}

std::string format_catalog(const std::vector<ChipClassSpec>& catalog) {
  std::ostringstream os;
  os << header_line() << '\n';
  for (const auto& s : catalog) {
    os << s.class_tag << ',' << s.manufacturer << ',' << s.capacity_label << ','
       << to_string(s.technology) << ',' << to_string(s.op_kind) << ',' << s.num_locations << ','
       << text::sig(s.base_latency_us, 17) << ',' << text::sig(s.drift_amplitude, 17) << ','
       << text::sig(s.drift_exponent, 17) << ',' << s.drift_ref_cycles << ','
       << text::sig(s.noise_sigma, 17) << ',' << text::sig(s.chip_sigma, 17) << ','
       << text::sig(s.loc_sigma, 17) << ',';
    if (s.step_cycles) os << *s.step_cycles;
    os << ',';
    if (s.step_factor) os << text::sig(*s.step_factor, 17);
    os << '\n';
  }
  return os.str();
}

std::string_view builtin_catalog_text() noexcept { return detail::kBuiltinCatalogText; }

const std::vector<ChipClassSpec>& builtin_catalog() {
  static const std::vector<ChipClassSpec> catalog = parse_catalog(detail::kBuiltinCatalogText);
  return catalog;
}

std::vector<ChipClassSpec> load_catalog(std::string_view source) {
  if (source == "builtin") return builtin_catalog();
  return parse_catalog(text::read_file(std::filesystem::path(source)));
}

const ChipClassSpec& find_class(const std::vector<ChipClassSpec>& catalog, int class_tag) {
  auto it = std::find_if(catalog.begin(), catalog.end(),
                         [&](const ChipClassSpec& s) { return s.class_tag == class_tag; });
  if (it == catalog.end()) {
    throw ValidationError("class tag " + std::to_string(class_tag) + " not in catalog");
  }
  return *it;
}

}  // namespace nvmfp
