// Binary snapshot codec. Layout is documented in docs/snapshot-format.md.

#include <bit>
#include <cstring>

#include "arena/envsim.hpp"

namespace arena::envsim {

namespace {

constexpr std::string_view kMagic = "WAASNAP1";

enum Tag : std::uint8_t {
  kSeed = 0x01,
  kTick = 0x02,
  kForeground = 0x03,
  kWindow = 0x04,
  kFile = 0x05,
  kClipboard = 0x06,
  kSetting = 0x07,
  kCookie = 0x08,
  kFocus = 0x09,
  kTimer = 0x0A,

  kWinId = 0x10,
  kWinTitle = 0x11,
  kWinApp = 0x12,
  kWinPage = 0x13,
  kWinDocument = 0x14,
  kWinViewport = 0x15,
  kWinExtent = 0x16,
  kWinNode = 0x17,
  kWinBehavior = 0x18,

  kNodeId = 0x20,
  kNodeKind = 0x21,
  kNodeContent = 0x22,
  kNodePlaceholder = 0x23,
  kNodeBox = 0x24,
  kNodeZ = 0x25,
  kNodeEnabled = 0x26,
  kNodeVisible = 0x27,
  kNodeScrolls = 0x28,
  kNodeBehavior = 0x29,

  kTimerDue = 0x40,
  kTimerWindow = 0x41,
  kTimerEffects = 0x42,

  kFilePath = 0x50,
  kFileIsDir = 0x51,
  kFileContent = 0x52,
  kFileHidden = 0x53,
  kFileReadonly = 0x54,

  kClipKind = 0x60,
  kClipText = 0x61,

  kCookieDomain = 0x70,
  kCookieName = 0x71,
  kCookieValue = 0x72,

  kSettingApp = 0x80,
  kSettingValue = 0x81,

  kFocusWindow = 0x90,
  kFocusNode = 0x91,
  kFocusSelectAll = 0x92,
};

std::string u64(std::uint64_t v) {
  std::string out(8, '\0');
  for (int i = 0; i < 8; ++i) out[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  return out;
}

std::string f64(double v) { return u64(std::bit_cast<std::uint64_t>(v)); }
std::string flag(bool b) { return std::string(1, b ? '\x01' : '\x00'); }

class Writer {
 public:
  Writer& field(std::uint8_t tag, std::string_view payload) {
    out_.push_back(static_cast<char>(tag));
    auto n = static_cast<std::uint32_t>(payload.size());
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((n >> (8 * i)) & 0xFF));
    out_.append(payload);
    return *this;
  }
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

std::string encode_node(const UiNode& n) {
  Writer w;
  w.field(kNodeId, n.id).field(kNodeKind, node_kind_name(n.kind)).field(kNodeContent, n.content);
  w.field(kNodePlaceholder, n.placeholder);
  w.field(kNodeBox, f64(n.bbox.x1) + f64(n.bbox.y1) + f64(n.bbox.x2) + f64(n.bbox.y2));
  w.field(kNodeZ, u64(static_cast<std::uint64_t>(n.z)));
  w.field(kNodeEnabled, flag(n.enabled)).field(kNodeVisible, flag(n.visible));
  w.field(kNodeScrolls, flag(n.scrolls));
  for (const auto& b : n.behaviors) w.field(kNodeBehavior, json(b).dump());
  return w.str();
}

std::string encode_window(const WindowState& win) {
  Writer w;
  w.field(kWinId, win.id).field(kWinTitle, win.title).field(kWinApp, win.app);
  w.field(kWinPage, win.page).field(kWinDocument, win.document);
  w.field(kWinViewport, f64(win.viewport)).field(kWinExtent, f64(win.scroll_extent));
  for (const auto& n : win.nodes) w.field(kWinNode, encode_node(n));
  for (const auto& b : win.behaviors) w.field(kWinBehavior, json(b).dump());
  return w.str();
}

// ---------------------------------------------------------------------------

struct Field {
  std::uint8_t tag;
  std::string_view payload;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : b_(bytes) {}
  bool done() const { return pos_ >= b_.size(); }
  Field next() {
    if (b_.size() - pos_ < 5) throw SnapshotError("truncated field header");
    auto tag = static_cast<std::uint8_t>(b_[pos_]);
    std::uint32_t n = 0;
    for (int i = 0; i < 4; ++i) {
      n |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_ + 1 + i])) << (8 * i);
    }
    pos_ += 5;
    if (b_.size() - pos_ < n) throw SnapshotError("truncated field payload");
    Field f{tag, b_.substr(pos_, n)};
    pos_ += n;
    return f;
  }

 private:
  std::string_view b_;
  std::size_t pos_ = 0;
};

std::uint64_t get_u64(std::string_view p) {
  if (p.size() != 8) throw SnapshotError("bad integer field");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}
double get_f64(std::string_view p) { return std::bit_cast<double>(get_u64(p)); }
bool get_flag(std::string_view p) {
  if (p.size() != 1 || static_cast<unsigned char>(p[0]) > 1) throw SnapshotError("bad flag field");
  return p[0] == 1;
}

template <typename T>
T get_json(std::string_view p) {
  try {
    return json::parse(p).get<T>();
  } catch (const std::exception& e) {
    throw SnapshotError(std::string("bad embedded JSON: ") + e.what());
  }
}

[[noreturn]] void bad_tag(std::uint8_t tag, const char* where) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "unknown tag 0x%02X in %s", tag, where);
  throw SnapshotError(buf);
}

UiNode decode_node(std::string_view bytes) {
  UiNode n;
  Reader r(bytes);
  while (!r.done()) {
    Field f = r.next();
    switch (f.tag) {
      case kNodeId: n.id = f.payload; break;
      case kNodeKind:
        try {
          n.kind = parse_node_kind(f.payload);
        } catch (const std::invalid_argument& e) {
          throw SnapshotError(e.what());
        }
        break;
      case kNodeContent: n.content = f.payload; break;
      case kNodePlaceholder: n.placeholder = f.payload; break;
      case kNodeBox:
        if (f.payload.size() != 32) throw SnapshotError("bad bbox field");
        n.bbox = {get_f64(f.payload.substr(0, 8)), get_f64(f.payload.substr(8, 8)),
                  get_f64(f.payload.substr(16, 8)), get_f64(f.payload.substr(24, 8))};
        break;
      case kNodeZ: n.z = static_cast<std::int64_t>(get_u64(f.payload)); break;
      case kNodeEnabled: n.enabled = get_flag(f.payload); break;
      case kNodeVisible: n.visible = get_flag(f.payload); break;
      case kNodeScrolls: n.scrolls = get_flag(f.payload); break;
      case kNodeBehavior: n.behaviors.push_back(get_json<Behavior>(f.payload)); break;
      default: bad_tag(f.tag, "node");
    }
  }
  return n;
}

WindowState decode_window(std::string_view bytes) {
  WindowState w;
  Reader r(bytes);
  while (!r.done()) {
    Field f = r.next();
    switch (f.tag) {
      case kWinId: w.id = f.payload; break;
      case kWinTitle: w.title = f.payload; break;
      case kWinApp: w.app = f.payload; break;
      case kWinPage: w.page = f.payload; break;
      case kWinDocument: w.document = f.payload; break;
      case kWinViewport: w.viewport = get_f64(f.payload); break;
      case kWinExtent: w.scroll_extent = get_f64(f.payload); break;
      case kWinNode: w.nodes.push_back(decode_node(f.payload)); break;
      case kWinBehavior: w.behaviors.push_back(get_json<Behavior>(f.payload)); break;
      default: bad_tag(f.tag, "window");
    }
  }
  return w;
}

}  // namespace

std::string snapshot(const DeviceState& s) {
  Writer w;
  w.field(kSeed, u64(s.rng_seed)).field(kTick, u64(s.tick)).field(kForeground, s.foreground_id());
  for (const auto& win : s.windows) w.field(kWindow, encode_window(win));
  for (const auto& [path, f] : s.files) {
    Writer r;
    r.field(kFilePath, path).field(kFileIsDir, flag(f.is_dir)).field(kFileContent, f.content);
    r.field(kFileHidden, flag(f.hidden)).field(kFileReadonly, flag(f.readonly));
    w.field(kFile, r.str());
  }
  {
    Writer r;
    r.field(kClipKind, std::string(1, static_cast<char>(s.clipboard.kind)));
    r.field(kClipText, s.clipboard.text);
    w.field(kClipboard, r.str());
  }
  for (const auto& [app, value] : s.settings) {
    Writer r;
    r.field(kSettingApp, app).field(kSettingValue, value.dump());
    w.field(kSetting, r.str());
  }
  for (const auto& c : s.cookies) {
    Writer r;
    r.field(kCookieDomain, c.domain).field(kCookieName, c.name).field(kCookieValue, c.value);
    w.field(kCookie, r.str());
  }
  if (s.focus) {
    Writer r;
    r.field(kFocusWindow, s.focus->window).field(kFocusNode, s.focus->node);
    r.field(kFocusSelectAll, flag(s.focus->select_all));
    w.field(kFocus, r.str());
  }
  for (const auto& t : s.timers) {
    Writer r;
    r.field(kTimerDue, u64(t.due)).field(kTimerWindow, t.window).field(kTimerEffects, json(t.effects).dump());
    w.field(kTimer, r.str());
  }
  return std::string(kMagic) + w.str();
}

DeviceState parse_snapshot(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) throw SnapshotError("missing snapshot magic");
  DeviceState s;
  std::string foreground;
  Reader top(bytes.substr(kMagic.size()));
  while (!top.done()) {
    Field f = top.next();
    switch (f.tag) {
      case kSeed: s.rng_seed = get_u64(f.payload); break;
      case kTick: s.tick = get_u64(f.payload); break;
      case kForeground: foreground = f.payload; break;
      case kWindow: s.windows.push_back(decode_window(f.payload)); break;
      case kFile: {
        std::string path;
        FileNode node;
        Reader r(f.payload);
        while (!r.done()) {
          Field g = r.next();
          switch (g.tag) {
            case kFilePath: path = g.payload; break;
            case kFileIsDir: node.is_dir = get_flag(g.payload); break;
            case kFileContent: node.content = g.payload; break;
            case kFileHidden: node.hidden = get_flag(g.payload); break;
            case kFileReadonly: node.readonly = get_flag(g.payload); break;
            default: bad_tag(g.tag, "file");
          }
        }
        s.files[path] = node;
        break;
      }
      case kClipboard: {
        Reader r(f.payload);
        while (!r.done()) {
          Field g = r.next();
          if (g.tag == kClipKind) {
            if (g.payload.size() != 1 || static_cast<unsigned char>(g.payload[0]) > 2) {
              throw SnapshotError("bad clipboard kind");
            }
            s.clipboard.kind = static_cast<ClipboardKind>(g.payload[0]);
          } else if (g.tag == kClipText) {
            s.clipboard.text = g.payload;
          } else {
            bad_tag(g.tag, "clipboard");
          }
        }
        break;
      }
      case kSetting: {
        std::string app;
        json value;
        Reader r(f.payload);
        while (!r.done()) {
          Field g = r.next();
          if (g.tag == kSettingApp) app = g.payload;
          else if (g.tag == kSettingValue) value = get_json<json>(g.payload);
          else bad_tag(g.tag, "setting");
        }
        s.settings[app] = value;
        break;
      }
      case kCookie: {
        Cookie c;
        Reader r(f.payload);
        while (!r.done()) {
          Field g = r.next();
          if (g.tag == kCookieDomain) c.domain = g.payload;
          else if (g.tag == kCookieName) c.name = g.payload;
          else if (g.tag == kCookieValue) c.value = g.payload;
          else bad_tag(g.tag, "cookie");
        }
        s.cookies.push_back(c);
        break;
      }
      case kFocus: {
        Focus fo;
        Reader r(f.payload);
        while (!r.done()) {
          Field g = r.next();
          if (g.tag == kFocusWindow) fo.window = g.payload;
          else if (g.tag == kFocusNode) fo.node = g.payload;
          else if (g.tag == kFocusSelectAll) fo.select_all = get_flag(g.payload);
          else bad_tag(g.tag, "focus");
        }
        s.focus = fo;
        break;
      }
      case kTimer: {
        Timer t;
        Reader r(f.payload);
        while (!r.done()) {
          Field g = r.next();
          if (g.tag == kTimerDue) t.due = get_u64(g.payload);
          else if (g.tag == kTimerWindow) t.window = g.payload;
          else if (g.tag == kTimerEffects) t.effects = get_json<std::vector<Effect>>(g.payload);
          else bad_tag(g.tag, "timer");
        }
        s.timers.push_back(std::move(t));
        break;
      }
      default: bad_tag(f.tag, "snapshot");
    }
  }
  if (foreground != s.foreground_id()) throw SnapshotError("foreground does not match window order");
  return s;
}

std::string snapshot_digest(const DeviceState& state) { return sha256_hex(snapshot(state)); }

}  // namespace arena::envsim
