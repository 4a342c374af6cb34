// Reader behavior for compiled pages. Words remain plain links without it.
(function () {
  "use strict";

  var root = document.documentElement;
  var consent = root.getAttribute("data-rf-consent") === "true";
  var current = null;

  function logEvent(event, target) {
    if (!consent) return;
    var body = JSON.stringify({ ts: new Date().toISOString(), event: event, target: target });
    try {
      fetch("/log", { method: "POST", headers: { "Content-Type": "application/json" }, body: body })
        .catch(function () {});
    } catch (e) {}
  }

  function play(control) {
    var src = control.getAttribute("href");
    if (!src) return;
    if (current) {
      current.pause();
    }
    if (!current || current.getAttribute("src") !== src) {
      current = new Audio(src);
    }
    current.currentTime = 0;
    control.classList.remove("rf-audio-error");
    current.play().catch(function () {
      control.classList.add("rf-audio-error");
    });
    logEvent("audio_play", control.getAttribute("data-resource-id") || src);
  }

  function init() {
    document.querySelectorAll("a.rf-word").forEach(function (word) {
      word.addEventListener("click", function () {
        logEvent("word_click", word.getAttribute("data-lemma") || "");
      });
    });
    document.querySelectorAll("a.rf-audio").forEach(function (control) {
      control.addEventListener("click", function (ev) {
        ev.preventDefault();
        play(control);
      });
    });
    var lemma = document.body && document.body.getAttribute("data-lemma");
    if (lemma) logEvent("concordance_view", lemma);
  }

  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", init);
  } else {
    init();
  }
})();
