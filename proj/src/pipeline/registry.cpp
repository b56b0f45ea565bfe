#include "skg/core/error.hpp"
#include "skg/pipeline/components.hpp"

namespace skg::pipeline {

void Registry::register_component(StageKind kind, const std::string& name, Factory factory) {
  auto [it, inserted] = factories_.try_emplace({kind, name}, std::move(factory));
  if (!inserted) {
    throw Error(ErrorCode::DuplicateName,
                std::string(to_string(kind)) + " component '" + name + "' is already registered");
  }
}

bool Registry::contains(StageKind kind, const std::string& name) const { return factories_.contains({kind, name}); }

std::vector<std::string> Registry::names(StageKind kind) const {
  std::vector<std::string> out;
  for (const auto& [key, f] : factories_) {
    if (key.first == kind) out.push_back(key.second);
  }
  return out;
}

std::unique_ptr<Component> Registry::build(const StageDescriptor& desc, BuildContext& ctx) const {
  auto it = factories_.find({desc.kind, desc.name});
  if (it == factories_.end()) {
    throw Error(ErrorCode::UnknownComponent,
                "no " + std::string(to_string(desc.kind)) + " component named '" + desc.name + "'");
  }
  std::unique_ptr<Component> c;
  try {
    c = it->second(desc, ctx);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BuildError) throw;
    throw Error(ErrorCode::BuildError, "building " + desc.name + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::BuildError, "building " + desc.name + ": " + e.what());
  }
  bool ok = false;
  switch (desc.kind) {
    case StageKind::Porter: ok = dynamic_cast<Porter*>(c.get()) != nullptr; break;
    case StageKind::Checker: ok = dynamic_cast<Checker*>(c.get()) != nullptr; break;
    case StageKind::Parser: ok = dynamic_cast<Parser*>(c.get()) != nullptr; break;
    case StageKind::Extractor: ok = dynamic_cast<Extractor*>(c.get()) != nullptr; break;
    case StageKind::Connector: ok = dynamic_cast<Connector*>(c.get()) != nullptr; break;
  }
  if (!ok) throw Error(ErrorCode::BuildError, "component '" + desc.name + "' does not implement its stage interface");
  return c;
}

}  // namespace skg::pipeline
