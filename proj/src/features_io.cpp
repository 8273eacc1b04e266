#include <fstream>

#include "mmd/binary_io.hpp"
#include "mmd/encoders.hpp"

namespace mmd {

namespace {
constexpr std::string_view kFeaturesMagic = "MMDENC1";
}

void save_features(const EncodedCatalog& encoded, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  binary::write_magic(out, kFeaturesMagic);
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    const std::string& id = encoded.ids[i];
    binary::write_u32(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    binary::write_f64s(out, encoded.image.row(i));
    binary::write_f64s(out, encoded.text.row(i));
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

EncodedCatalog load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
  binary::expect_magic(in, kFeaturesMagic);
  std::vector<std::string> ids;
  std::vector<double> image;
  std::vector<double> text;
  while (in.peek() != std::char_traits<char>::eof()) {
    const std::uint32_t len = binary::read_u32(in, "product id length");
    if (len > 4096) fail(ErrorKind::Parse, "implausible product id length in " + path.string());
    std::string id(len, '\0');
    binary::read_exact(in, id.data(), len, "product id");
    ids.push_back(std::move(id));
    const std::size_t img_at = image.size();
    image.resize(img_at + kImageDim);
    binary::read_f64s(in, std::span(image).subspan(img_at), "image features");
    const std::size_t txt_at = text.size();
    text.resize(txt_at + kTextDim);
    binary::read_f64s(in, std::span(text).subspan(txt_at), "text features");
  }
  const std::size_t n = ids.size();
  return {std::move(ids), Matrix(n, kImageDim, std::move(image)), Matrix(n, kTextDim, std::move(text))};
}

}  // namespace mmd
