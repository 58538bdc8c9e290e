#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace polmine {

// Attitude a comment takes toward its subject ("Tipo" column).
enum class Stance { apoyo, critica, acusacion, rechazo, admiracion, pregunta, informacion };

// Party affinity ("Inclinación" column). Declaration order is the canonical
// rendering order everywhere (prompts, tables).
enum class Party { lfi, ps, rn, lrem, lr, indeterminado };

inline constexpr std::array<Stance, 7> kAllStances = {
    Stance::apoyo,      Stance::critica,  Stance::acusacion,  Stance::rechazo,
    Stance::admiracion, Stance::pregunta, Stance::informacion};

inline constexpr std::array<Party, 6> kAllParties = {Party::lfi,  Party::ps, Party::rn,
                                                     Party::lrem, Party::lr, Party::indeterminado};

// "Apoyo", "Crítica", ...
std::string_view display_name(Stance s);

// "Francia Insumisa (LFI)", ..., "Indeterminado"
std::string_view display_name(Party p);

// "LFI", "PS", "RN", "LREM", "LR", "Indeterminado"
std::string_view party_code(Party p);

// Case-insensitive; tolerates a leading "de " ("de apoyo", "De crítica") and
// unaccented spellings.
std::optional<Stance> parse_stance(std::string_view s);

// Accepts display names, codes, and names without the parenthesized code,
// case-insensitively.
std::optional<Party> parse_party(std::string_view s);

inline std::size_t index_of(Party p) { return static_cast<std::size_t>(p); }

}  // namespace polmine
