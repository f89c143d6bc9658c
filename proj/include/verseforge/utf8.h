#ifndef VERSEFORGE_UTF8_H_
#define VERSEFORGE_UTF8_H_

#include <string>
#include <string_view>
#include <vector>

namespace verseforge::utf8 {

// Decodes UTF-8 into code points. Malformed bytes decode to U+FFFD.
std::u32string Decode(std::string_view text);

std::string Encode(std::u32string_view cps);
std::string Encode(char32_t cp);

// Splits into one string per code point.
std::vector<std::string> Chars(std::string_view text);

std::size_t Length(std::string_view text);

// Lowercases ASCII and the Latin-1 / Latin Extended-A letters used by Czech.
char32_t ToLower(char32_t cp);
std::string ToLower(std::string_view text);

bool IsLetter(char32_t cp);
bool IsDigit(char32_t cp);
bool IsSpace(char32_t cp);

std::string Trim(std::string_view text);

}  // namespace verseforge::utf8

#endif  // VERSEFORGE_UTF8_H_
