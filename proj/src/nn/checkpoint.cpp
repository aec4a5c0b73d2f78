#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "gesturekit/models.hpp"

namespace gk {

namespace {

constexpr char kMagic[4] = {'G', 'N', 'N', '1'};

nlohmann::json class_names() {
  nlohmann::json names = nlohmann::json::array();
  for (int c = 0; c < kNumClasses; ++c)
    names.push_back(gesture_name(static_cast<GestureClass>(c)));
  return names;
}

void write_header(std::ostream& out, const nlohmann::json& header) {
  const std::string text = header.dump();
  out.write(kMagic, 4);
  const std::uint32_t len = static_cast<std::uint32_t>(text.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

nlohmann::json read_header(std::istream& in, const std::string& path) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path + ": GNN1: bad magic");
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len == 0 || len > (1u << 20))
    throw std::runtime_error(path + ": GNN1: bad header length");
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw std::runtime_error(path + ": GNN1: truncated header");
  return nlohmann::json::parse(text);
}

void write_blob(std::ostream& out, const std::vector<float>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
}

void read_blob(std::istream& in, std::vector<float>& v, const std::string& path) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(float)));
  if (!in) throw std::runtime_error(path + ": GNN1: truncated blob");
}

}  // namespace

void save_model_checkpoint(const std::string& path, const std::string& arch,
                           nn::Model<float>& model) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.layers()) layers.push_back(l->kind());
  nlohmann::json header = {
      {"kind", "model"},
      {"arch", arch},
      {"classes", class_names()},
      {"layers", layers},
      {"param_count", model.param_count()},
  };
  write_header(f, header);
  for (auto* p : model.parameters()) write_blob(f, p->v);
  for (auto* p : model.state_tensors()) write_blob(f, p->v);
  if (!f) throw std::runtime_error("write failed: " + path);
}

nn::Model<float> load_model_checkpoint(const std::string& path, std::string* arch) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  nlohmann::json header = read_header(f, path);
  if (header.value("kind", "") != "model")
    throw std::runtime_error(path + ": GNN1: not a model checkpoint");
  const std::string name = header.at("arch").get<std::string>();
  nn::Model<float> model = build_model(name);
  if (header.at("param_count").get<std::size_t>() != model.param_count())
    throw std::runtime_error(path + ": GNN1: parameter count mismatch");
  for (auto* p : model.parameters()) read_blob(f, p->v, path);
  for (auto* p : model.state_tensors()) read_blob(f, p->v, path);
  if (arch) *arch = name;
  return model;
}

void save_template_checkpoint(const std::string& path,
                              const GestureTemplateSet& templates) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  nlohmann::json header = {
      {"kind", "template"},
      {"arch", "template"},
      {"classes", class_names()},
      {"profile_length", kRsaTime},
  };
  write_header(f, header);
  for (const auto& p : templates.profiles) {
    std::vector<float> blob(p.data(), p.data() + p.size());
    write_blob(f, blob);
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

GestureTemplateSet load_template_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  nlohmann::json header = read_header(f, path);
  if (header.value("kind", "") != "template")
    throw std::runtime_error(path + ": GNN1: not a template checkpoint");
  GestureTemplateSet t;
  for (auto& p : t.profiles) {
    p.resize(kRsaTime, 3);
    std::vector<float> blob(p.size());
    read_blob(f, blob, path);
    std::memcpy(p.data(), blob.data(), blob.size() * sizeof(float));
  }
  return t;
}

std::string checkpoint_kind(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  nlohmann::json header = read_header(f, path);
  return header.at("arch").get<std::string>();
}

}  // namespace gk
