#include "polmine/labels.hpp"

#include <utility>

#include "polmine/text.hpp"

namespace polmine {

std::string_view display_name(Stance s) {
  switch (s) {
    case Stance::apoyo: return "Apoyo";
    case Stance::critica: return "Crítica";
    case Stance::acusacion: return "Acusación";
    case Stance::rechazo: return "Rechazo";
    case Stance::admiracion: return "Admiración";
    case Stance::pregunta: return "Pregunta";
    case Stance::informacion: return "Información";
  }
  return "";
}

std::string_view display_name(Party p) {
  switch (p) {
    case Party::lfi: return "Francia Insumisa (LFI)";
    case Party::ps: return "Partido Socialista (PS)";
    case Party::rn: return "Reagrupación Nacional (RN)";
    case Party::lrem: return "La République En Marche! (LREM)";
    case Party::lr: return "Los Republicanos (LR)";
    case Party::indeterminado: return "Indeterminado";
  }
  return "";
}

std::string_view party_code(Party p) {
  switch (p) {
    case Party::lfi: return "LFI";
    case Party::ps: return "PS";
    case Party::rn: return "RN";
    case Party::lrem: return "LREM";
    case Party::lr: return "LR";
    case Party::indeterminado: return "Indeterminado";
  }
  return "";
}

std::optional<Stance> parse_stance(std::string_view s) {
  std::string key = text::to_lower(text::collapse_whitespace(s));
  if (key.starts_with("de ")) key.erase(0, 3);
  static const std::pair<std::string_view, Stance> table[] = {
      {"apoyo", Stance::apoyo},           {"crítica", Stance::critica},
      {"critica", Stance::critica},       {"acusación", Stance::acusacion},
      {"acusacion", Stance::acusacion},   {"rechazo", Stance::rechazo},
      {"admiración", Stance::admiracion}, {"admiracion", Stance::admiracion},
      {"pregunta", Stance::pregunta},     {"información", Stance::informacion},
      {"informacion", Stance::informacion},
  };
  for (const auto& [name, stance] : table) {
    if (key == name) return stance;
  }
  return std::nullopt;
}

std::optional<Party> parse_party(std::string_view s) {
  std::string key = text::to_lower(text::collapse_whitespace(s));
  if (key.empty()) return std::nullopt;
  for (Party p : kAllParties) {
    std::string display = text::to_lower(display_name(p));
    std::string code = text::to_lower(party_code(p));
    if (key == display || key == code) return p;
    auto paren = display.rfind(" (");
    if (paren != std::string::npos && key == display.substr(0, paren)) return p;
  }
  return std::nullopt;
}

}  // namespace polmine
