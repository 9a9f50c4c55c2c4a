#include "arena/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "arena/callexpr.hpp"
#include "arena/evaluate.hpp"

namespace arena::corpus {

namespace {

using envsim::AppModel;
using envsim::Behavior;
using envsim::Effect;
using envsim::EffectKind;
using envsim::EventKind;
using envsim::NodeKind;
using envsim::Page;
using envsim::UiNode;

// ---------------------------------------------------------------------------
// Model-building shorthand

Effect fx(EffectKind kind, std::string target = "", std::string key = "", json value = nullptr,
          std::string coerce = "") {
  Effect e;
  e.kind = kind;
  e.target = std::move(target);
  e.key = std::move(key);
  e.value = std::move(value);
  e.coerce = std::move(coerce);
  return e;
}

Effect go(std::string page, std::string fallback = "") {
  return fx(EffectKind::navigate, std::move(page), std::move(fallback));
}
Effect content(std::string node, std::string text) {
  return fx(EffectKind::set_content, std::move(node), "", std::move(text));
}
Effect setting(std::string app, std::string key, json value, std::string coerce = "") {
  return fx(EffectKind::set_setting, std::move(app), std::move(key), std::move(value), std::move(coerce));
}

Behavior on(EventKind ev, std::vector<Effect> effects, std::string key = "") {
  return Behavior{ev, std::move(key), std::move(effects)};
}
Behavior on_click(std::vector<Effect> effects) { return on(EventKind::click, std::move(effects)); }
Behavior on_key(std::string key, std::vector<Effect> effects) {
  return on(EventKind::key, std::move(effects), std::move(key));
}

UiNode node(std::string id, NodeKind kind, std::string text, Rect box, std::vector<Behavior> behaviors = {},
            std::int64_t z = 1) {
  UiNode n;
  n.id = std::move(id);
  n.kind = kind;
  n.content = std::move(text);
  n.bbox = box;
  n.z = z;
  n.behaviors = std::move(behaviors);
  return n;
}

UiNode input(std::string id, std::string placeholder, Rect box, std::vector<Behavior> behaviors = {}) {
  UiNode n = node(std::move(id), NodeKind::input, "", box, std::move(behaviors), 2);
  n.placeholder = std::move(placeholder);
  return n;
}

UiNode text(std::string id, std::string s, Rect box, std::int64_t z = 1) {
  return node(std::move(id), NodeKind::text, std::move(s), box, {}, z);
}
UiNode button(std::string id, std::string s, Rect box, std::vector<Behavior> b = {}) {
  return node(std::move(id), NodeKind::button, std::move(s), box, std::move(b), 2);
}
UiNode item(std::string id, std::string s, Rect box, std::vector<Behavior> b = {}) {
  return node(std::move(id), NodeKind::list_item, std::move(s), box, std::move(b), 2);
}

Page page(std::string title, std::vector<UiNode> base, std::vector<UiNode> extra, std::vector<Effect> enter = {}) {
  Page p;
  p.title = std::move(title);
  p.nodes = std::move(base);
  for (auto& n : extra) p.nodes.push_back(std::move(n));
  p.on_enter = std::move(enter);
  return p;
}

// ---------------------------------------------------------------------------
// Layout constants shared by the models and the oracle scripts

namespace vlc_ui {
constexpr Rect kTools{0.12, 0.00, 0.18, 0.04};
constexpr Rect kPrefs{0.12, 0.05, 0.30, 0.09};
constexpr Rect kTabAudio{0.20, 0.06, 0.35, 0.11};
constexpr Rect kTabInput{0.65, 0.06, 0.80, 0.11};
constexpr Rect kField{0.45, 0.30, 0.95, 0.35};
constexpr Rect kSave{0.70, 0.90, 0.82, 0.96};
}  // namespace vlc_ui

namespace edge_ui {
constexpr Rect kAddress{0.10, 0.05, 0.80, 0.09};
constexpr Rect kMenu{0.95, 0.05, 0.99, 0.09};
constexpr Rect kMenuSettings{0.75, 0.30, 0.99, 0.34};
constexpr Rect kDntToggle{0.82, 0.30, 0.98, 0.34};
constexpr Rect kSiteSearch{0.60, 0.20, 0.90, 0.24};
constexpr Rect kRemoveShown{0.30, 0.26, 0.50, 0.30};
constexpr Rect kHomeUrl{0.30, 0.40, 0.70, 0.44};
constexpr Rect kHomeSave{0.72, 0.40, 0.80, 0.44};
}  // namespace edge_ui

namespace settings_ui {
constexpr Rect kSystem{0.02, 0.15, 0.22, 0.20};
constexpr Rect kNotifications{0.25, 0.27, 0.95, 0.33};
constexpr Rect kNotifToggle{0.82, 0.20, 0.98, 0.26};
}  // namespace settings_ui

namespace explorer_ui {
constexpr Rect kNavDocuments{0.00, 0.28, 0.18, 0.32};
constexpr Rect kSecret{0.22, 0.15, 0.60, 0.19};
constexpr Rect kHidden{0.50, 0.60, 0.65, 0.64};
constexpr Rect kOk{0.60, 0.90, 0.72, 0.95};
}  // namespace explorer_ui

namespace code_ui {
constexpr Rect kTreeFiles{0.04, 0.24, 0.20, 0.28};
constexpr Rect kTreeDebug{0.04, 0.32, 0.20, 0.36};
constexpr Rect kFocusBreak{0.25, 0.25, 0.40, 0.29};
constexpr Rect kAfterDelay{0.25, 0.29, 0.45, 0.33};
constexpr Rect kDelay{0.25, 1.05, 0.45, 1.09};  // below the fold
}  // namespace code_ui

namespace writer_ui {
constexpr Rect kFormat{0.20, 0.00, 0.26, 0.04};
constexpr Rect kClearFormatting{0.20, 0.17, 0.40, 0.21};
}  // namespace writer_ui

namespace calc_ui {
constexpr Rect kTab{0.02, 0.90, 0.14, 0.94};
constexpr Rect kName{0.35, 0.45, 0.65, 0.50};
constexpr Rect kOk{0.50, 0.55, 0.58, 0.60};
}  // namespace calc_ui

namespace notepad_ui {
constexpr Rect kEditor{0.00, 0.06, 1.00, 0.95};
constexpr Rect kFileName{0.20, 0.80, 0.70, 0.85};
constexpr Rect kSave{0.75, 0.80, 0.85, 0.85};
}  // namespace notepad_ui

namespace clock_ui {
constexpr Rect kWorld{0.00, 0.35, 0.15, 0.40};
constexpr Rect kAdd{0.85, 0.90, 0.98, 0.96};
constexpr Rect kSearch{0.30, 0.40, 0.70, 0.45};
constexpr Rect kResult{0.30, 0.47, 0.70, 0.51};
}  // namespace clock_ui

// ---------------------------------------------------------------------------
// App models

AppModel vlc() {
  using namespace vlc_ui;
  AppModel m;
  m.name = "vlc";
  m.aliases = {"vlc media player", "vlc.exe"};
  m.title = "VLC media player";
  m.initial_page = "main";
  m.default_settings = {{"recording_file_path", envsim::user_path("Videos")},
                        {"max_volume", 125},
                        {"one_instance", true}};

  const std::vector<UiNode> chrome = {
      button("media", "Media", {0.00, 0.00, 0.06, 0.04}),
      button("playback", "Playback", {0.06, 0.00, 0.12, 0.04}),
      button("tools", "Tools", kTools, {on_click({go("tools_menu")})}),
      button("view", "View", {0.18, 0.00, 0.24, 0.04}),
      node("video", NodeKind::image, "Video output", {0.00, 0.05, 1.00, 0.85}, {}, 0),
      button("play", "Play", {0.01, 0.88, 0.05, 0.96}),
      button("stop", "Stop", {0.06, 0.88, 0.10, 0.96}),
      node("volume", NodeKind::slider, "Volume 100%", {0.80, 0.90, 0.98, 0.94}),
  };
  auto main = page("", chrome, {});
  main.window_behaviors = {on_key("ctrl+p", {go("prefs_interface")})};
  m.pages["main"] = main;
  m.pages["tools_menu"] = page("", chrome,
                               {item("menu_effects", "Effects and Filters", {0.12, 0.09, 0.30, 0.13}),
                                item("menu_prefs", "Preferences", kPrefs, {on_click({go("prefs_interface")})}),
                                item("menu_messages", "Messages", {0.12, 0.13, 0.30, 0.17})});

  const std::vector<UiNode> tabs = {
      button("tab_interface", "Interface", {0.05, 0.06, 0.20, 0.11}, {on_click({go("prefs_interface")})}),
      button("tab_audio", "Audio", kTabAudio, {on_click({go("prefs_audio")})}),
      button("tab_video", "Video", {0.35, 0.06, 0.50, 0.11}),
      button("tab_subtitles", "Subtitles / OSD", {0.50, 0.06, 0.65, 0.11}),
      button("tab_input", "Input / Codecs", kTabInput, {on_click({go("prefs_input")})}),
      button("tab_hotkeys", "Hotkeys", {0.80, 0.06, 0.95, 0.11}),
      button("cancel", "Cancel", {0.84, 0.90, 0.96, 0.96}, {on_click({go("main")})}),
  };
  m.pages["prefs_interface"] =
      page("Simple Preferences", tabs,
           {text("lbl_lang", "Language", {0.05, 0.20, 0.40, 0.25}),
            text("lbl_one", "Allow only one instance", {0.05, 0.30, 0.40, 0.35}),
            button("save", "Save", kSave, {on_click({go("main")})})});
  m.pages["prefs_audio"] = page(
      "Simple Preferences", tabs,
      {text("lbl_max", "Maximum volume displayed", {0.05, 0.30, 0.40, 0.35}),
       input("max_volume", "", kField),
       button("save", "Save", kSave,
              {on_click({setting("vlc", "max_volume", "${node:max_volume}", "number"), go("main")})})},
      {content("max_volume", "${setting:vlc:max_volume}")});
  m.pages["prefs_input"] = page(
      "Simple Preferences", tabs,
      {text("lbl_record", "Record directory or filename", {0.05, 0.30, 0.40, 0.35}),
       input("record_path", "", kField),
       button("save", "Save", kSave,
              {on_click({setting("vlc", "recording_file_path", "${node:record_path}"), go("main")})})},
      {content("record_path", "${setting:vlc:recording_file_path}")});
  return m;
}

AppModel msedge() {
  using namespace edge_ui;
  AppModel m;
  m.name = "msedge";
  m.aliases = {"edge", "microsoft edge", "msedge.exe"};
  m.title = "New tab - Microsoft Edge";
  m.initial_page = "newtab";
  m.default_settings = {{"homepage", "about:newtab"},
                        {"privacy.do_not_track", false},
                        {"search_engine", "Bing"}};

  const std::vector<UiNode> chrome = {
      text("tab", "New tab", {0.00, 0.00, 0.15, 0.04}),
      input("address", "Search or enter web address", kAddress,
            {on_key("enter", {go("${node:address}", "not_found")})}),
      button("menu", "Settings and more", kMenu, {on_click({go("menu")})}),
  };
  m.pages["newtab"] = page("", chrome, {text("greeting", "Good afternoon", {0.35, 0.30, 0.65, 0.36})});
  m.pages["not_found"] =
      page("Can't reach this page - Microsoft Edge", chrome,
           {text("err", "Can't reach this page", {0.30, 0.30, 0.70, 0.36})});
  m.pages["menu"] = page("", chrome,
                         {item("m_newtab", "New tab", {0.75, 0.10, 0.99, 0.14}, {on_click({go("newtab")})}),
                          item("m_history", "History", {0.75, 0.18, 0.99, 0.22}),
                          item("m_downloads", "Downloads", {0.75, 0.22, 0.99, 0.26}),
                          item("m_settings", "Settings", kMenuSettings,
                               {on_click({go("edge://settings/privacy")})})});

  std::vector<UiNode> nav = chrome;
  nav.push_back(item("nav_profiles", "Profiles", {0.00, 0.15, 0.25, 0.19}));
  nav.push_back(item("nav_privacy", "Privacy, search, and services", {0.00, 0.19, 0.25, 0.23},
                     {on_click({go("edge://settings/privacy")})}));
  nav.push_back(item("nav_cookies", "Cookies and site permissions", {0.00, 0.23, 0.25, 0.27},
                     {on_click({go("edge://settings/content")})}));
  nav.push_back(item("nav_start", "Start, home, and new tabs", {0.00, 0.27, 0.25, 0.31},
                     {on_click({go("edge://settings/startHomeNTP")})}));

  const std::string settings_title = "Settings - Microsoft Edge";
  Page privacy = page(
      settings_title, nav,
      {text("dnt_label", "Send \"Do Not Track\" requests", {0.30, 0.30, 0.78, 0.34}),
       button("dnt_toggle", "", kDntToggle,
              {on_click({fx(EffectKind::toggle_setting, "msedge", "privacy.do_not_track"),
                         content("dnt_toggle", "Do Not Track: ${setting:msedge:privacy.do_not_track}")})}),
       text("clear_label", "Clear browsing data", {0.30, 0.40, 0.78, 0.44})},
      {content("dnt_toggle", "Do Not Track: ${setting:msedge:privacy.do_not_track}")});
  m.pages["edge://settings/privacy"] = privacy;
  m.pages["edge://settings"] = privacy;
  m.pages["edge://settings/content"] =
      page(settings_title, nav,
           {item("site_data", "Manage and delete cookies and site data", {0.30, 0.20, 0.90, 0.25},
                 {on_click({go("edge://settings/siteData")})}),
            item("perm_location", "Location", {0.30, 0.30, 0.90, 0.35})});
  m.pages["edge://settings/siteData"] =
      page(settings_title, nav,
           {text("sd_label", "Cookies and data stored", {0.30, 0.20, 0.58, 0.24}),
            input("site_search", "Search", kSiteSearch),
            button("remove_shown", "Remove all shown", kRemoveShown,
                   {on_click({fx(EffectKind::delete_cookies, "${node:site_search}")})})});
  m.pages["edge://settings/startHomeNTP"] = page(
      settings_title, nav,
      {text("home_label", "Home button", {0.30, 0.30, 0.70, 0.34}),
       text("home_current", "", {0.30, 0.34, 0.70, 0.38}),
       input("homepage_url", "Enter URL", kHomeUrl),
       button("home_save", "Save", kHomeSave,
              {on_click({setting("msedge", "homepage", "${node:homepage_url}"),
                         content("home_current", "Current: ${setting:msedge:homepage}")})})},
      {content("home_current", "Current: ${setting:msedge:homepage}")});
  return m;
}

AppModel windows_settings() {
  using namespace settings_ui;
  AppModel m;
  m.name = "settings";
  m.aliases = {"windows settings", "ms-settings:", "control panel"};
  m.title = "Settings";
  m.initial_page = "home";
  m.default_settings = {{"notifications.enabled", true},
                        {"time.zone", "(UTC) Coordinated Universal Time"},
                        {"background.type", "Picture"}};
  const std::vector<UiNode> nav = {
      item("nav_home", "Home", {0.02, 0.10, 0.22, 0.15}, {on_click({go("home")})}),
      item("nav_system", "System", kSystem, {on_click({go("system")})}),
      item("nav_bluetooth", "Bluetooth & devices", {0.02, 0.20, 0.22, 0.25}),
      item("nav_network", "Network & internet", {0.02, 0.25, 0.22, 0.30}),
      item("nav_personalization", "Personalization", {0.02, 0.30, 0.22, 0.35}),
      item("nav_apps", "Apps", {0.02, 0.35, 0.22, 0.40}),
      item("nav_time", "Time & language", {0.02, 0.45, 0.22, 0.50}),
  };
  m.pages["home"] = page("", nav, {text("home_header", "Home", {0.25, 0.08, 0.60, 0.13})});
  m.pages["system"] =
      page("", nav,
           {text("sys_header", "System", {0.25, 0.08, 0.60, 0.13}),
            item("sys_display", "Display", {0.25, 0.15, 0.95, 0.21}),
            item("sys_sound", "Sound", {0.25, 0.21, 0.95, 0.27}),
            item("sys_notifications", "Notifications", kNotifications, {on_click({go("notifications")})}),
            item("sys_focus", "Focus", {0.25, 0.33, 0.95, 0.39}),
            item("sys_power", "Power & battery", {0.25, 0.39, 0.95, 0.45})});
  m.pages["notifications"] = page(
      "", nav,
      {text("notif_header", "System > Notifications", {0.25, 0.08, 0.70, 0.13}),
       text("notif_label", "Get notifications from apps and other senders", {0.25, 0.20, 0.80, 0.26}),
       button("notif_toggle", "", kNotifToggle,
              {on_click({fx(EffectKind::toggle_setting, "settings", "notifications.enabled"),
                         content("notif_toggle", "Notifications: ${setting:settings:notifications.enabled}")})})},
      {content("notif_toggle", "Notifications: ${setting:settings:notifications.enabled}")});
  return m;
}

AppModel file_explorer() {
  using namespace explorer_ui;
  AppModel m;
  m.name = "file_explorer";
  m.aliases = {"explorer", "file explorer", "explorer.exe"};
  m.title = "File Explorer";
  m.initial_page = "home";
  m.default_settings = {{"pending.hidden", false}, {"pending.readonly", false}};
  const std::vector<UiNode> nav = {
      item("nav_home", "Home", {0.00, 0.12, 0.18, 0.16}, {on_click({go("home")})}),
      item("nav_desktop", "Desktop", {0.00, 0.20, 0.18, 0.24}),
      item("nav_downloads", "Downloads", {0.00, 0.24, 0.18, 0.28}),
      item("nav_documents", "Documents", kNavDocuments, {on_click({go("documents")})}),
      item("nav_pictures", "Pictures", {0.00, 0.32, 0.18, 0.36}),
  };
  m.pages["home"] = page("", nav,
                         {text("qa", "Quick access", {0.22, 0.08, 0.50, 0.12}),
                          item("qa_documents", "Documents", {0.22, 0.15, 0.40, 0.20},
                               {on(EventKind::double_click, {go("documents")})})});
  const std::string secret = envsim::user_path("Documents\\secret.txt");
  m.pages["documents"] = page(
      "Documents - File Explorer", nav,
      {item("f_secret", "secret.txt", kSecret,
            {on(EventKind::right_click, {go("secret_props")})})});
  m.pages["secret_props"] = page(
      "secret.txt Properties", {},
      {text("attrs", "Attributes:", {0.10, 0.60, 0.28, 0.64}),
       button("ro_box", "Read-only", {0.30, 0.60, 0.45, 0.64},
              {on_click({fx(EffectKind::toggle_setting, "file_explorer", "pending.readonly")})}),
       button("hidden_box", "Hidden", kHidden,
              {on_click({fx(EffectKind::toggle_setting, "file_explorer", "pending.hidden")})}),
       button("ok", "OK", kOk,
              {on_click({fx(EffectKind::set_file_attr, secret, "hidden", "${setting:file_explorer:pending.hidden}",
                            "bool"),
                         fx(EffectKind::set_file_attr, secret, "readonly",
                            "${setting:file_explorer:pending.readonly}", "bool"),
                         go("documents")})}),
       button("cancel", "Cancel", {0.74, 0.90, 0.86, 0.95}, {on_click({go("documents")})})},
      {setting("file_explorer", "pending.hidden", false), setting("file_explorer", "pending.readonly", false)});
  return m;
}

AppModel vscode() {
  using namespace code_ui;
  AppModel m;
  m.name = "vscode";
  m.aliases = {"code", "visual studio code", "code.exe"};
  m.title = "Visual Studio Code";
  m.initial_page = "editor";
  m.default_settings = {{"debug.focusEditorOnBreak", true},
                        {"files.autoSave", "off"},
                        {"files.autoSaveDelay", 1000},
                        {"workbench.colorTheme", "Default Dark Modern"}};
  const std::vector<UiNode> bar = {
      node("act_explorer", NodeKind::icon, "Explorer", {0.00, 0.06, 0.04, 0.12}),
      node("act_extensions", NodeKind::icon, "Extensions", {0.00, 0.24, 0.04, 0.30},
           {on_click({go("extensions")})}),
      node("act_manage", NodeKind::icon, "Manage", {0.00, 0.90, 0.04, 0.96}, {on_click({go("manage_menu")})}),
  };
  auto with_keys = [](Page p) {
    p.window_behaviors = {on_key("ctrl+,", {go("settings")})};
    return p;
  };
  m.pages["editor"] = with_keys(page("", bar, {text("welcome", "Welcome", {0.10, 0.10, 0.50, 0.16})}));
  m.pages["manage_menu"] =
      with_keys(page("", bar,
                     {item("mm_extensions", "Extensions", {0.04, 0.76, 0.20, 0.80}, {on_click({go("extensions")})}),
                      item("mm_settings", "Settings", {0.04, 0.80, 0.20, 0.84}, {on_click({go("settings")})})}));
  m.pages["extensions"] = with_keys(page(
      "Extensions - Visual Studio Code", bar,
      {input("ext_search", "Search Extensions in Marketplace", {0.05, 0.06, 0.30, 0.10}),
       text("ext_offline", "Unable to reach the Marketplace. You are offline.", {0.05, 0.12, 0.30, 0.18})}));

  std::vector<UiNode> tree = bar;
  tree.push_back(input("set_search", "Search settings", {0.25, 0.06, 0.90, 0.10}));
  tree.push_back(item("t_common", "Commonly Used", {0.04, 0.16, 0.20, 0.20}, {on_click({go("settings")})}));
  tree.push_back(item("t_editor", "Text Editor", {0.04, 0.20, 0.20, 0.24}));
  tree.push_back(item("t_files", "Files", kTreeFiles, {on_click({go("settings_files")})}));
  tree.push_back(item("t_features", "Features", {0.04, 0.28, 0.20, 0.32}));
  tree.push_back(item("t_debug", "Debug", kTreeDebug, {on_click({go("settings_debug")})}));
  const std::string title = "Settings - Visual Studio Code";
  m.pages["settings"] = with_keys(page(title, tree, {text("common", "Commonly Used", {0.25, 0.14, 0.90, 0.18})}));
  m.pages["settings_debug"] = with_keys(page(
      title, tree,
      {text("fb_label", "Debug: Focus Editor On Break", {0.25, 0.20, 0.90, 0.24}),
       button("focus_break", "", kFocusBreak,
              {on_click({fx(EffectKind::toggle_setting, "vscode", "debug.focusEditorOnBreak"),
                         content("focus_break", "${setting:vscode:debug.focusEditorOnBreak}")})})},
      {content("focus_break", "${setting:vscode:debug.focusEditorOnBreak}")}));

  auto scrolling = [](UiNode n) {
    n.scrolls = true;
    return n;
  };
  auto mode = [&](std::string id, std::string value, Rect box) {
    return scrolling(item(std::move(id), value, box, {on_click({setting("vscode", "files.autoSave", value),
                                                                content("as_current", "Current: " + value)})}));
  };
  Page files = page(
      title, tree,
      {scrolling(text("as_label", "Files: Auto Save", {0.25, 0.16, 0.60, 0.20})),
       scrolling(text("as_current", "", {0.60, 0.16, 0.90, 0.20})),
       mode("as_off", "off", {0.25, 0.21, 0.45, 0.25}),
       mode("as_after", "afterDelay", kAfterDelay),
       mode("as_focus", "onFocusChange", {0.25, 0.33, 0.45, 0.37}),
       mode("as_window", "onWindowChange", {0.25, 0.37, 0.45, 0.41}),
       scrolling(text("asd_label", "Files: Auto Save Delay", {0.25, 1.00, 0.90, 1.04})),
       scrolling(input("autosave_delay", "", kDelay,
                       {on_key("enter", {setting("vscode", "files.autoSaveDelay", "${node:autosave_delay}", "number")})}))},
      {content("as_current", "Current: ${setting:vscode:files.autoSave}"),
       content("autosave_delay", "${setting:vscode:files.autoSaveDelay}")});
  files.scroll_extent = 0.5;
  m.pages["settings_files"] = with_keys(files);
  return m;
}

AppModel writer() {
  using namespace writer_ui;
  AppModel m;
  m.name = "writer";
  m.aliases = {"libreoffice writer", "swriter", "soffice --writer"};
  m.title = "Untitled 1 - LibreOffice Writer";
  m.initial_page = "doc";
  const std::vector<UiNode> menus = {
      button("m_file", "File", {0.00, 0.00, 0.05, 0.04}),
      button("m_edit", "Edit", {0.05, 0.00, 0.10, 0.04}),
      button("m_view", "View", {0.10, 0.00, 0.15, 0.04}),
      button("m_insert", "Insert", {0.15, 0.00, 0.20, 0.04}),
      button("m_format", "Format", kFormat, {on_click({go("format_menu")})}),
      text("body", "", {0.10, 0.10, 0.90, 0.90}, 0),
  };
  const Effect clear = fx(EffectKind::transform_file, "${doc}", "strip_highlights");
  const std::string title = "${doc_name} - LibreOffice Writer";
  Page doc = page(title, menus, {}, {content("body", "${doc_text}")});
  doc.window_behaviors = {on_key("ctrl+m", {clear, content("body", "${doc_text}")})};
  m.pages["doc"] = doc;
  m.pages["format_menu"] =
      page(title, menus,
           {item("f_text", "Text", {0.20, 0.05, 0.40, 0.09}),
            item("f_spacing", "Spacing", {0.20, 0.09, 0.40, 0.13}),
            item("f_align", "Align Text", {0.20, 0.13, 0.40, 0.17}),
            item("f_clear", "Clear Direct Formatting", kClearFormatting, {on_click({clear, go("doc")})})},
           {content("body", "${doc_text}")});
  return m;
}

AppModel calc() {
  using namespace calc_ui;
  AppModel m;
  m.name = "calc";
  m.aliases = {"libreoffice calc", "scalc", "soffice --calc"};
  m.title = "Untitled 1 - LibreOffice Calc";
  m.initial_page = "sheet";
  m.default_settings = {{"sheet1.name", "Sheet1"}};
  const std::string title = "${doc_name} - LibreOffice Calc";
  const std::vector<UiNode> base = {
      button("m_file", "File", {0.00, 0.00, 0.05, 0.04}),
      button("m_sheet", "Sheet", {0.05, 0.00, 0.10, 0.04}),
      text("grid", "", {0.02, 0.10, 0.98, 0.85}, 0),
      button("tab1", "", kTab,
             {on(EventKind::double_click, {go("rename")}), on(EventKind::right_click, {go("tab_menu")})}),
  };
  const std::vector<Effect> refresh = {content("grid", "${doc_text}"), content("tab1", "${setting:calc:sheet1.name}")};
  m.pages["sheet"] = page(title, base, {}, refresh);
  m.pages["tab_menu"] =
      page(title, base,
           {item("tm_insert", "Insert Sheet...", {0.02, 0.78, 0.20, 0.82}),
            item("tm_rename", "Rename Sheet...", {0.02, 0.82, 0.20, 0.86}, {on_click({go("rename")})})},
           refresh);
  m.pages["rename"] = page(
      "Rename Sheet", {},
      {text("rn_label", "Name", {0.35, 0.40, 0.65, 0.44}), input("new_name", "", kName),
       button("rn_ok", "OK", kOk,
              {on_click({fx(EffectKind::transform_file, "${doc}", "set_line",
                            json{{"line", 0}, {"text", "[${node:new_name}]"}}),
                         setting("calc", "sheet1.name", "${node:new_name}"), go("sheet")})}),
       button("rn_cancel", "Cancel", {0.60, 0.55, 0.68, 0.60}, {on_click({go("sheet")})})},
      {content("new_name", "${setting:calc:sheet1.name}")});
  return m;
}

AppModel notepad() {
  using namespace notepad_ui;
  AppModel m;
  m.name = "notepad";
  m.aliases = {"notepad.exe"};
  m.title = "Untitled - Notepad";
  m.initial_page = "editor";
  m.default_settings = {{"buffer", ""}, {"doc_title", "Untitled"}};
  const Effect stash = setting("notepad", "buffer", "${node:editor}");
  const std::vector<Effect> save_as = {stash, go("save_as")};
  const std::vector<UiNode> base = {
      button("m_file", "File", {0.00, 0.00, 0.05, 0.04}, {on_click({stash, go("file_menu")})}),
      button("m_edit", "Edit", {0.05, 0.00, 0.10, 0.04}),
      node("editor", NodeKind::input, "", kEditor, {on_key("ctrl+s", save_as)}, 0),
  };
  const std::string title = "${setting:notepad:doc_title} - Notepad";
  Page editor = page(title, base, {}, {content("editor", "${setting:notepad:buffer}")});
  editor.window_behaviors = {on_key("ctrl+s", save_as)};
  m.pages["editor"] = editor;
  Page menu = page(title, base,
                   {item("fm_new", "New", {0.00, 0.05, 0.15, 0.09}),
                    item("fm_open", "Open...", {0.00, 0.09, 0.15, 0.13}),
                    item("fm_save", "Save", {0.00, 0.13, 0.15, 0.17}, {on_click({go("save_as")})})},
                   {content("editor", "${setting:notepad:buffer}")});
  menu.window_behaviors = {on_key("ctrl+s", save_as)};
  m.pages["file_menu"] = menu;
  const std::vector<Effect> save = {
      fx(EffectKind::write_file, envsim::user_path("Documents\\${node:filename}"), "", "${setting:notepad:buffer}"),
      setting("notepad", "doc_title", "${node:filename}"), go("editor")};
  m.pages["save_as"] =
      page("Save As", {},
           {text("location", "Save in: Documents", {0.20, 0.10, 0.70, 0.14}),
            input("filename", "File name", kFileName, {on_key("enter", save)}),
            button("save", "Save", kSave, {on_click(save)}),
            button("cancel", "Cancel", {0.86, 0.80, 0.96, 0.85}, {on_click({go("editor")})})});
  return m;
}

AppModel clock() {
  using namespace clock_ui;
  AppModel m;
  m.name = "clock";
  m.aliases = {"alarms & clock", "windows clock"};
  m.title = "Clock";
  m.initial_page = "timer";
  m.default_settings = {{"world_clocks", json::array({"Local time"})}};
  const std::vector<UiNode> nav = {
      item("nav_focus", "Focus sessions", {0.00, 0.15, 0.15, 0.20}),
      item("nav_timer", "Timer", {0.00, 0.20, 0.15, 0.25}, {on_click({go("timer")})}),
      item("nav_alarm", "Alarm", {0.00, 0.25, 0.15, 0.30}),
      item("nav_stopwatch", "Stopwatch", {0.00, 0.30, 0.15, 0.35}),
      item("nav_world", "World clock", kWorld, {on_click({go("world")})}),
  };
  m.pages["timer"] = page("", nav, {text("t_header", "Timer", {0.20, 0.08, 0.50, 0.13})});
  m.pages["world"] = page("", nav,
                          {text("w_header", "World clock", {0.20, 0.08, 0.50, 0.13}),
                           text("clock_list", "", {0.20, 0.15, 0.95, 0.30}),
                           button("add_city", "Add a new city", kAdd, {on_click({go("add_city")})})},
                          {content("clock_list", "${setting:clock:world_clocks}")});
  const std::vector<UiNode> dialog = {
      text("ac_title", "Add new city", {0.30, 0.32, 0.70, 0.37}),
      input("city_search", "Enter a location", kSearch,
            {on_key("enter", {go("results:${node:city_search}", "no_results")})}),
      button("ac_cancel", "Cancel", {0.60, 0.60, 0.70, 0.65}, {on_click({go("world")})}),
  };
  m.pages["add_city"] = page("", dialog, {});
  m.pages["no_results"] = page("", dialog, {text("none", "No results", {0.30, 0.47, 0.70, 0.51})});
  auto result = [&](const std::string& city) {
    json list = json::array({"Local time", city});
    return page("", dialog, {item("r_0", city, kResult, {on_click({setting("clock", "world_clocks", list), go("world")})})});
  };
  for (const std::string q : {"Munich", "munich", "Munich, Germany"}) m.pages["results:" + q] = result("Munich, Germany");
  for (const std::string q : {"Kyoto", "kyoto", "Kyoto, Japan"}) m.pages["results:" + q] = result("Kyoto, Japan");
  return m;
}

// ---------------------------------------------------------------------------
// Oracle response helpers

std::string num(double v) { return format_trimmed(v, 4); }

std::string at(const Rect& r, const char* what = "single_click") {
  return "computer.mouse.move_abs(x=" + num(r.cx()) + ", y=" + num(r.cy()) + ")\ncomputer.mouse." + what + "()";
}
std::string click(const Rect& r) { return at(r); }
std::string dclick(const Rect& r) { return at(r, "double_click"); }
std::string rclick(const Rect& r) { return at(r, "right_click"); }
std::string write(const std::string& s) { return "computer.keyboard.write(" + callexpr::render_literal(s) + ")"; }
std::string press(const std::string& k) { return "computer.keyboard.press(" + callexpr::render_literal(k) + ")"; }
std::string open(const std::string& p) { return "computer.os.open_program(" + callexpr::render_literal(p) + ")"; }
std::string scroll_down() { return "computer.mouse.scroll(dir=\"down\")"; }

std::string command(const std::vector<std::string>& calls, const std::string& memory = "") {
  std::string out = "```decision\nCOMMAND\n```\n```python\n";
  for (const auto& c : calls) out += c + "\n";
  out += "```\n";
  if (!memory.empty()) out += "```memory\n" + memory + "\n```\n";
  return out;
}
std::string done() { return "```decision\nDONE\n```\n"; }
std::string fail(const std::string& reason) { return "```decision\n# " + reason + "\nFAIL\n```\n"; }

// ---------------------------------------------------------------------------
// Fixtures and golden artifacts

const char* kReviewDoc =
    "Course outline draft\n"
    "Week one covers <hl>basic</hl> sorting and the <hl>analisys</hl> of loops.\n"
    "Week two moves on to graphs and <hl>shortest pathes</hl>.\n";
const char* kReviewGolden =
    "Course outline draft\n"
    "Week one covers basic sorting and the analisys of loops.\n"
    "Week two moves on to graphs and shortest pathes.\n";
const char* kSheet =
    "[Sheet1]\n"
    "Student,Grade,Score\n"
    "Ana,5,88\n"
    "Ben,5,92\n"
    "Chen,6,79\n";
const char* kSheetGolden =
    "[LARSScienceAssessment]\n"
    "Student,Grade,Score\n"
    "Ana,5,88\n"
    "Ben,5,92\n"
    "Chen,6,79\n";

struct TaskDef {
  std::string file;
  const char* json_text;
  std::vector<std::string> oracle;
  std::map<std::string, std::string> golden;
  bool adapted = false;
  std::string note;
};

std::vector<TaskDef> task_defs() {
  std::vector<TaskDef> d;

  // Media & Video ------------------------------------------------------------
  {
    using namespace vlc_ui;
    d.push_back({"media_video/vlc-recordings-desktop.json", R"JSON({
    "id": "8ba5ae7a-5ae5-4eab-9fcc-5dd4fe3abf89-W0S",
    "instruction": "Help me modify the folder used to store my recordings to the Desktop",
    "config": [
        {
            "type": "launch",
            "parameters": {
                "command": "vlc"
            }
        },
        {
            "type": "execute",
            "parameters": {
                "command": [
                    "python",
                    "-c",
                    "import pyautogui; import time; pyautogui.click(960, 540); time.sleep(0.5);"
                ]
            }
        }
    ],
    "evaluator": {
        "func": "vis_vlc_recordings_folder",
        "expected": {
            "type": "rule",
            "rules": {
                "recording_file_path": "C:\\Users\\Docker\\Desktop"
            }
        }
    },
    "result": {
        "type": "vlc_config",
        "dest": "vlcrc"
    }
})JSON",
                 {command({click(kTools)}, "Looking for the preferences under Tools."),
                  command({click(kPrefs)}),
                  command({click(kTabInput)}, "Recording folder lives on the Input / Codecs tab."),
                  command({click(kField), press("ctrl+a"), write("C:\\Users\\Docker\\Desktop"), click(kSave)}),
                  done()},
                 {},
                 false,
                 "config and evaluator as published"});

    d.push_back({"media_video/vlc-recordings-downloads.json", R"JSON({
  "id": "vlc-recordings-downloads",
  "instruction": "Can you change the folder that stores my VLC player recordings to the Downloads folder?",
  "config": [{"type": "launch", "parameters": {"command": "vlc"}}],
  "evaluator": {"func": "vis_vlc_recordings_folder",
                "expected": {"type": "rule", "rules": {"recording_file_path": "C:\\Users\\Docker\\Downloads"}}},
  "result": {"type": "vlc_config", "dest": "vlcrc"}
})JSON",
                 {command({press("ctrl+p")}), command({click(kTabInput)}),
                  command({click(kField), press("ctrl+a"), write("C:\\Users\\Docker\\Downloads"), click(kSave)}),
                  done()},
                 {},
                 false,
                 "evaluator reconstructed from the recordings-folder pattern"});

    d.push_back({"media_video/vlc-max-volume.json", R"JSON({
  "id": "vlc-max-volume-100",
  "instruction": "MY VLC Player's volume is too high in general. Can you set the max volume to just 100%?",
  "config": [{"type": "launch", "parameters": {"command": "vlc"}}],
  "evaluator": {"func": "check_json_settings",
                "expected": {"type": "rule", "rules": {"expected": {"max_volume": 100}}}},
  "result": {"type": "settings_json", "dest": "vlc"}
})JSON",
                 {command({click(kTools)}), command({click(kPrefs)}), command({click(kTabAudio)}),
                  command({click(kField), press("ctrl+a"), write("100"), click(kSave)}), done()},
                 {},
                 false,
                 "evaluator reconstructed as a settings check"});
  }

  // Web Browser ----------------------------------------------------------------
  {
    using namespace edge_ui;
    d.push_back({"web_browsing/edge-amazon-cookies.json", R"JSON({
  "id": "edge-clear-amazon-cookies",
  "instruction": "Can you help me clean up my computer by getting rid of all the tracking things that Amazon might have saved? I want to make sure my browsing is private and those sites don't remember me.",
  "config": [
    {"type": "set_cookie", "parameters": {"domain": "amazon.com", "name": "session-id", "value": "132-7781"}},
    {"type": "set_cookie", "parameters": {"domain": "www.amazon.com", "name": "ubid-main", "value": "133-0042"}},
    {"type": "set_cookie", "parameters": {"domain": "bing.com", "name": "MUID", "value": "0A1B"}},
    {"type": "launch", "parameters": {"command": "msedge"}}
  ],
  "evaluator": {"func": "is_cookie_deleted", "expected": {"type": "rule", "rules": {"domains": ["amazon.com"]}}},
  "result": {"type": "cookies", "dest": "msedge"}
})JSON",
                 {command({click(kAddress), write("edge://settings/siteData"), press("enter")}),
                  command({click(kSiteSearch), write("amazon"), click(kRemoveShown)},
                          "Removed the amazon entries from site data."),
                  done()},
                 {},
                 false,
                 "evaluator as published"});

    d.push_back({"web_browsing/edge-do-not-track.json", R"JSON({
  "id": "edge-enable-do-not-track",
  "instruction": "Can you enable the 'Do Not Track' feature in Edge to enhance my online privacy?",
  "config": [{"type": "launch", "parameters": {"command": "msedge"}}],
  "evaluator": {"func": "check_json_settings",
                "expected": {"type": "rule", "rules": {"expected": {"privacy.do_not_track": true}}}},
  "result": {"type": "settings_json", "dest": "msedge"}
})JSON",
                 {command({click(kMenu)}), command({click(kMenuSettings)}), command({click(kDntToggle)}), done()},
                 {},
                 false,
                 "evaluator reconstructed as a settings check"});

    d.push_back({"web_browsing/edge-homepage.json", R"JSON({
  "id": "edge-homepage-wikipedia",
  "instruction": "Help me set \"www.wikipedia.org\" as home page in \"msedge\" browser",
  "config": [{"type": "launch", "parameters": {"command": "msedge"}}],
  "evaluator": {"func": "check_json_settings",
                "expected": {"type": "rule", "rules": {"expected": {"homepage": "www.wikipedia.org"}}}},
  "result": {"type": "settings_json", "dest": "msedge"}
})JSON",
                 {command({click(kAddress), write("edge://settings/startHomeNTP"), press("enter")}),
                  command({click(kHomeUrl), write("www.wikipedia.org"), click(kHomeSave)}), done()},
                 {},
                 false,
                 "evaluator reconstructed as a settings check"});
  }

  // Windows System -------------------------------------------------------------
  {
    using namespace settings_ui;
    d.push_back({"windows_system/settings-notifications-off.json", R"JSON({
  "id": "settings-notifications-off",
  "instruction": "I need to \"turn off\" notifications for my system in the settings.",
  "config": [],
  "evaluator": {"func": "check_json_settings",
                "expected": {"type": "rule", "rules": {"expected": {"notifications.enabled": false}}}},
  "result": {"type": "settings_json", "dest": "settings"},
  "domain": "Windows System"
})JSON",
                 {command({open("settings")}), command({click(kSystem)}), command({click(kNotifications)}),
                  command({click(kNotifToggle)}), done()},
                 {},
                 false,
                 "evaluator reconstructed as a settings check"});
  }
  {
    using namespace explorer_ui;
    d.push_back({"windows_system/explorer-hide-secret.json", R"JSON({
  "id": "explorer-hide-secret-txt",
  "instruction": "Set the file \"secret.txt\" in the Documents folder as hidden.",
  "config": [
    {"type": "download", "parameters": {"fixture": "secret.txt", "path": "C:\\Users\\Docker\\Documents\\secret.txt"}},
    {"type": "launch", "parameters": {"command": "file_explorer"}}
  ],
  "evaluator": {"func": "check_file_attributes", "expected": {"type": "rule", "rules": {"hidden": true}}},
  "result": {"type": "file_attrs", "dest": "C:\\Users\\Docker\\Documents\\secret.txt"}
})JSON",
                 {command({click(kNavDocuments)}), command({rclick(kSecret)}),
                  command({click(kHidden), click(kOk)}), done()},
                 {},
                 false,
                 "evaluator reconstructed as a file attribute check"});
  }
  d.push_back({"windows_system/explorer-7zip-infeasible.json", R"JSON({
  "id": "explorer-7zip-oldprojects",
  "instruction": "Compress the 'OldProjects'folder in the user's 'Desktop' into a password-protected zip file with the password as '12345' using 7-zip. Save it as 'OldProjects.7z'",
  "config": [],
  "evaluator": {"func": "infeasible", "expected": {"type": "infeasible"}},
  "domain": "Windows System",
  "feasible": false
})JSON",
               {fail("7-Zip is not installed on this machine, so the task is infeasible")},
               {},
               true,
               "marked infeasible: the simulated desktop has no 7-Zip"});

  // Coding -----------------------------------------------------------------------
  {
    using namespace code_ui;
    d.push_back({"coding/vscode-debug-focus.json", R"JSON({
  "id": "vscode-debug-focus-editor-on-break",
  "instruction": "Please help me modify the setting of VS Code to keep my cursor focused on the debug console when debugging in VS Code, instead of automatically focusing back on the Editor.",
  "config": [{"type": "launch", "parameters": {"command": "vscode"}}],
  "evaluator": {"func": "check_json_settings",
                "expected": {"type": "rule", "rules": {"expected": {"debug.focusEditorOnBreak": false}}}},
  "result": {"type": "settings_json", "dest": "vscode"}
})JSON",
                 {command({press("ctrl+,")}), command({click(kTreeDebug)}), command({click(kFocusBreak)}), done()},
                 {},
                 false,
                 "evaluator as published"});

    const Rect delay_shown{kDelay.x1, kDelay.y1 - envsim::kScrollStep, kDelay.x2, kDelay.y2 - envsim::kScrollStep};
    d.push_back({"coding/vscode-autosave-delay.json", R"JSON({
  "id": "vscode-autosave-delay-1000",
  "instruction": "Can you delay VS Code autoSave for 1000 milliseconds?",
  "config": [{"type": "launch", "parameters": {"command": "vscode"}}],
  "evaluator": {"func": "check_json_settings",
                "expected": {"type": "rule", "rules": {"expected": {"files.autoSave": "afterDelay", "files.autoSaveDelay": 1000}}}},
  "result": {"type": "settings_json", "dest": "vscode"}
})JSON",
                 {command({press("ctrl+,")}), command({click(kTreeFiles)}),
                  command({click(kAfterDelay), scroll_down(), click(delay_shown), press("ctrl+a"), write("1000"),
                           press("enter")},
                          "Auto save set to afterDelay with a 1000 ms delay."),
                  done()},
                 {},
                 false,
                 "evaluator reconstructed as a settings check"});
  }
  d.push_back({"coding/vscode-autodocstring-infeasible.json", R"JSON({
  "id": "vscode-install-autodocstring",
  "instruction": "Please help me install the autoDocstring extension in VS Code.",
  "config": [{"type": "launch", "parameters": {"command": "vscode"}}],
  "evaluator": {"func": "infeasible", "expected": {"type": "infeasible"}},
  "feasible": false
})JSON",
               {fail("The extension marketplace is unreachable offline; infeasible")},
               {},
               true,
               "marked infeasible: the simulated editor has no marketplace access"});

  // Office -----------------------------------------------------------------------
  {
    using namespace writer_ui;
    d.push_back({"office/writer-remove-highlights.json", R"JSON({
  "id": "writer-remove-highlights",
  "instruction": "I have been editing my document and some words that needed to be rewritten are highlighted in yellow. As I fixed those words, please help me remove all highlight. I want to make sure that there is no highlight word.",
  "config": [
    {"type": "download", "parameters": {"fixture": "review.docx", "path": "C:\\Users\\Docker\\Documents\\review.docx"}},
    {"type": "open_file", "parameters": {"path": "C:\\Users\\Docker\\Documents\\review.docx", "app": "writer"}}
  ],
  "evaluator": {"func": "check_highlighted_words", "expected": {"type": "golden_file", "golden": "review.docx"}},
  "result": {"type": "file", "dest": "C:\\Users\\Docker\\Documents\\review.docx"}
})JSON",
                 {command({click(kFormat)}), command({click(kClearFormatting)}), done()},
                 {{"review.docx", kReviewGolden}},
                 false,
                 "evaluator as published; highlights encoded as <hl> spans"});
  }
  {
    using namespace calc_ui;
    d.push_back({"office/calc-rename-sheet.json", R"JSON({
  "id": "calc-rename-sheet1",
  "instruction": "Help me rename sheet1 \"LARSScienceAssessment\"",
  "config": [
    {"type": "download", "parameters": {"fixture": "assessment.ods", "path": "C:\\Users\\Docker\\Documents\\assessment.ods"}},
    {"type": "open_file", "parameters": {"path": "C:\\Users\\Docker\\Documents\\assessment.ods", "app": "calc"}}
  ],
  "evaluator": {"func": "exact_match_file", "expected": {"type": "golden_file", "golden": "assessment.ods"}},
  "result": {"type": "file", "dest": "C:\\Users\\Docker\\Documents\\assessment.ods"}
})JSON",
                 {command({dclick(kTab)}),
                  command({click(kName), press("ctrl+a"), write("LARSScienceAssessment"), click(kOk)}), done()},
                 {{"assessment.ods", kSheetGolden}},
                 false,
                 "workbook stored as text; sheet name on the first line"});
  }

  // Windows Utilities --------------------------------------------------------------
  {
    using namespace notepad_ui;
    d.push_back({"windows_utilities/notepad-draft.json", R"JSON({
  "id": "notepad-save-draft",
  "instruction": "Please open Notepad, create a new file named \"draft.txt\", type \"This is a draft.\", and save it to the Documents folder.",
  "config": [],
  "evaluator": {"func": "compare_text_file", "expected": {"type": "golden_file", "golden": "draft.txt"}},
  "result": {"type": "file", "dest": "C:\\Users\\Docker\\Documents\\draft.txt"},
  "domain": "Windows Utilities"
})JSON",
                 {command({open("notepad")}),
                  command({click(kEditor), write("This is a draft."), press("ctrl+s")}),
                  command({click(kFileName), write("draft.txt"), click(kSave)}), done()},
                 {{"draft.txt", "This is a draft."}},
                 false,
                 "continuous reward via text similarity"});
  }
  {
    using namespace clock_ui;
    d.push_back({"windows_utilities/clock-munich.json", R"JSON({
  "id": "clock-add-munich",
  "instruction": "Please add Munich, Germany to my list of world clocks in the Clock app.",
  "config": [],
  "evaluator": {"func": "check_json_settings",
                "expected": {"type": "rule", "rules": {"expected": {"world_clocks": ["Local time", "Munich, Germany"]}}}},
  "result": {"type": "settings_json", "dest": "clock"},
  "domain": "Windows Utilities"
})JSON",
                 {command({open("clock")}), command({click(kWorld)}), command({click(kAdd)}),
                  command({click(kSearch), write("Munich"), press("enter")}), command({click(kResult)}), done()},
                 {},
                 false,
                 "evaluator reconstructed as a settings check"});
  }
  return d;
}

envsim::FixtureStore fixtures() {
  return {{"secret.txt", "api key: do-not-share\n"}, {"review.docx", kReviewDoc}, {"assessment.ods", kSheet}};
}

std::string oracle_id(const std::string& file) {
  auto slash = file.rfind('/');
  auto stem = file.substr(slash == std::string::npos ? 0 : slash + 1);
  return stem.substr(0, stem.rfind('.'));
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CorpusError("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& p, const std::string& data) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw CorpusError("cannot write " + p.string());
  out << data;
}

}  // namespace

envsim::AppCatalog app_catalog() {
  envsim::AppCatalog c;
  for (auto m : {vlc(), msedge(), windows_settings(), file_explorer(), vscode(), writer(), calc(), notepad(), clock()}) {
    c.add(std::move(m));
  }
  return c;
}

Corpus build_corpus() {
  auto defs = task_defs();
  std::sort(defs.begin(), defs.end(), [](const TaskDef& a, const TaskDef& b) { return a.file < b.file; });

  auto assets = std::make_shared<agent::EnvAssets>();
  assets->catalog = app_catalog();
  assets->fixtures = fixtures();

  Corpus c;
  std::vector<taskspec::TaskSpec> tasks;
  std::vector<std::string> files;
  for (auto& d : defs) {
    auto spec = taskspec::parse_task(d.json_text);
    ManifestEntry e;
    e.task_id = spec.id;
    e.file = d.file;
    e.domain = spec.domain ? std::string(taskspec::domain_name(*spec.domain)) : "";
    e.feasible = spec.feasible;
    e.oracle = oracle_id(d.file);
    for (const auto& [name, data] : d.golden) {
      e.golden[name] = sha256_hex(data);
      assets->golden.artifacts[spec.id][name] = data;
    }
    e.adapted = d.adapted;
    e.note = d.note;
    c.manifest.push_back(e);
    c.oracles[spec.id] = d.oracle;
    files.push_back(d.file);
    tasks.push_back(std::move(spec));
  }
  c.suite = taskspec::make_suite(std::move(tasks), std::move(files));
  c.assets = assets;
  return c;
}

const Corpus& builtin() {
  static const Corpus c = build_corpus();
  return c;
}

const std::vector<std::string>& oracle_script(const Corpus& corpus, const std::string& task_id) {
  auto it = corpus.oracles.find(task_id);
  if (it == corpus.oracles.end()) throw UnknownTask("no oracle for task '" + task_id + "'");
  return it->second;
}

agent::PolicyFactory oracle_policies(const Corpus& corpus) {
  auto oracles = corpus.oracles;
  return [oracles](const taskspec::TaskSpec& task, std::uint64_t) -> std::unique_ptr<agent::Policy> {
    auto it = oracles.find(task.id);
    if (it == oracles.end()) throw UnknownTask("no oracle for task '" + task.id + "'");
    return std::make_unique<agent::ScriptedPolicy>(it->second);
  };
}

json manifest_json(const Corpus& corpus) {
  json entries = json::array();
  for (const auto& e : corpus.manifest) {
    entries.push_back(json{{"task_id", e.task_id},
                           {"file", e.file},
                           {"domain", e.domain},
                           {"feasible", e.feasible},
                           {"oracle", e.oracle},
                           {"golden", e.golden},
                           {"adapted", e.adapted},
                           {"note", e.note}});
  }
  return json{{"entries", entries}};
}

std::filesystem::path tasks_root(const std::filesystem::path& dir) {
  return std::filesystem::is_directory(dir / "tasks") ? dir / "tasks" : dir;
}

void export_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  for (std::size_t i = 0; i < corpus.suite.tasks.size(); ++i) {
    write_file(dir / "tasks" / corpus.suite.files[i], taskspec::serialize(corpus.suite.tasks[i]));
  }
  write_file(dir / "tasks" / "suite.txt", taskspec::render_suite_index(corpus.suite));
  for (const auto& [name, data] : corpus.assets->fixtures) write_file(dir / "fixtures" / name, data);
  for (const auto& [task, arts] : corpus.assets->golden.artifacts) {
    for (const auto& [name, data] : arts) write_file(dir / "golden" / task / name, data);
  }
  for (const auto& e : corpus.manifest) {
    auto it = corpus.oracles.find(e.task_id);
    if (it == corpus.oracles.end()) continue;
    write_file(dir / "oracles" / (e.oracle + ".json"),
               json{{"task_id", e.task_id}, {"responses", it->second}}.dump(2) + "\n");
  }
  write_file(dir / "manifest.json", manifest_json(corpus).dump(2) + "\n");
}

Corpus load_corpus_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  auto assets = std::make_shared<agent::EnvAssets>();
  assets->catalog = app_catalog();
  Corpus c;
  c.suite = taskspec::load_suite(tasks_root(dir));

  if (fs::is_directory(dir / "fixtures")) {
    for (const auto& entry : fs::directory_iterator(dir / "fixtures")) {
      if (entry.is_regular_file()) assets->fixtures[entry.path().filename().string()] = read_file(entry.path());
    }
  }
  if (fs::is_directory(dir / "golden")) {
    for (const auto& task_dir : fs::directory_iterator(dir / "golden")) {
      if (!task_dir.is_directory()) continue;
      for (const auto& f : fs::directory_iterator(task_dir.path())) {
        if (f.is_regular_file()) {
          assets->golden.artifacts[task_dir.path().filename().string()][f.path().filename().string()] =
              read_file(f.path());
        }
      }
    }
  }
  if (fs::is_directory(dir / "oracles")) {
    for (const auto& f : fs::directory_iterator(dir / "oracles")) {
      if (f.path().extension() != ".json") continue;
      json j = json::parse(read_file(f.path()));
      c.oracles[j.at("task_id").get<std::string>()] = j.at("responses").get<std::vector<std::string>>();
    }
  }
  if (fs::exists(dir / "manifest.json")) {
    json m = json::parse(read_file(dir / "manifest.json"));
    for (const auto& e : m.at("entries")) {
      ManifestEntry me;
      me.task_id = e.at("task_id").get<std::string>();
      me.file = e.value("file", "");
      me.domain = e.value("domain", "");
      me.feasible = e.value("feasible", true);
      me.oracle = e.value("oracle", "");
      me.golden = e.value("golden", std::map<std::string, std::string>{});
      me.adapted = e.value("adapted", false);
      me.note = e.value("note", "");
      for (const auto& [name, digest] : me.golden) {
        const std::string* data = assets->golden.find(me.task_id, name);
        if (!data) throw CorpusError("golden artifact " + me.task_id + "/" + name + " is missing");
        if (sha256_hex(*data) != digest) {
          throw CorpusError("golden artifact " + me.task_id + "/" + name + " does not match its digest");
        }
      }
      c.manifest.push_back(std::move(me));
    }
  }
  c.assets = assets;
  return c;
}

}  // namespace arena::corpus
