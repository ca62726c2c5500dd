/** DOM wiring for the studio: spectrogram + editable curves + transport.
 *
 *  One in-flight resynthesis at a time; the audio element always points at
 *  the server's current mel revision, so what you hear is server truth.
 */

import { ConflictError, CurveError, SessionClient, StyleBundleDoc } from "./api.js";
import { CurveModel } from "./curves.js";
import { flattenF0, rampToken, scaleToken, shiftF0, vibratoF0 } from "./edits.js";
import { parseMel } from "./melbin.js";
import { melToPixels } from "./render.js";
import { EditorState } from "./state.js";
import { validateF0Values, validateStyleScores } from "./validate.js";

const DEMO_SCORE = {
  singer_id: 0,
  notes: [
    { pitch: 62, start: 0, dur: 14, phonemes: { onset: "l", vowel: "a" } },
    { pitch: 65, start: 14, dur: 12, phonemes: { vowel: "i" } },
    { pitch: 67, start: 34, dur: 16, phonemes: { onset: "n", vowel: "o" } },
  ],
};

interface Ui {
  spectrogram: HTMLCanvasElement;
  f0Canvas: HTMLCanvasElement;
  tokenCanvases: HTMLCanvasElement[];
  status: HTMLElement;
  errorBox: HTMLElement;
  audio: HTMLAudioElement;
}

class Studio {
  state = new EditorState();
  f0Curve: CurveModel | null = null;
  tokenCurves: CurveModel[] = [];
  style: StyleBundleDoc | null = null;
  busy = false;

  constructor(private client: SessionClient, private ui: Ui) {}

  setStatus(text: string): void {
    this.ui.status.textContent =
      `${text} — revision ${this.client.revision}` +
      (this.state.hasUnsavedEdits ? " (unsaved edits)" : "");
  }

  showError(text: string): void {
    this.ui.errorBox.textContent = text;
    this.ui.errorBox.style.display = text ? "block" : "none";
  }

  async load(): Promise<void> {
    const [style, f0, melBytes] = await Promise.all([
      this.client.getStyle(),
      this.client.getF0(),
      this.client.getMel(),
    ]);
    this.style = style;
    this.f0Curve = new CurveModel({ kind: "f0" }, f0.f0_hz);
    this.tokenCurves = [];
    if (style.text) {
      for (let t = 0; t < style.text.n_tokens; t++) {
        this.tokenCurves.push(
          new CurveModel({ kind: "style-token", token: t },
                         style.text.scores.map((row) => row[t] ?? 0)));
      }
    }
    this.drawSpectrogram(melBytes);
    this.drawCurves();
    this.ui.audio.src = this.client.audioUrl();
    this.setStatus("loaded");
  }

  drawSpectrogram(bytes: ArrayBuffer): void {
    const mel = parseMel(bytes);
    const image = melToPixels(mel);
    const canvas = this.ui.spectrogram;
    canvas.width = image.width;
    canvas.height = image.height;
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    const imageData = ctx.createImageData(image.width, image.height);
    imageData.data.set(image.pixels);
    ctx.putImageData(imageData, 0, 0);
  }

  drawCurve(canvas: HTMLCanvasElement, curve: CurveModel, maxValue: number,
            color: string): void {
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    canvas.width = Math.max(canvas.clientWidth, curve.frames);
    const w = canvas.width;
    const h = canvas.height;
    ctx.clearRect(0, 0, w, h);
    ctx.fillStyle = curve.dirty ? "#3a2a14" : "#14141c";
    ctx.fillRect(0, 0, w, h);
    if (curve.selection) {
      const [a, b] = curve.selection;
      ctx.fillStyle = "#26324a";
      ctx.fillRect((a / curve.frames) * w, 0,
                   ((b - a) / curve.frames) * w, h);
    }
    ctx.strokeStyle = color;
    ctx.beginPath();
    curve.values.forEach((v, f) => {
      const x = ((f + 0.5) / curve.frames) * w;
      const y = h - (Math.min(v, maxValue) / maxValue) * (h - 4) - 2;
      if (f === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  drawCurves(): void {
    if (this.f0Curve) {
      this.drawCurve(this.ui.f0Canvas, this.f0Curve, 800, "#7dd3a0");
    }
    this.tokenCurves.forEach((curve, i) => {
      const canvas = this.ui.tokenCanvases[i];
      if (canvas) this.drawCurve(canvas, curve, 1.5, "#8ab4f8");
    });
  }

  attachDrag(canvas: HTMLCanvasElement, curve: CurveModel, maxValue: number,
             kind: "f0" | "style"): void {
    let dragging = false;
    let lastFrame = 0;
    let lastValue = 0;
    const frameOf = (ev: MouseEvent) => {
      const rect = canvas.getBoundingClientRect();
      return ((ev.clientX - rect.left) / rect.width) * curve.frames;
    };
    const valueOf = (ev: MouseEvent) => {
      const rect = canvas.getBoundingClientRect();
      const frac = 1 - (ev.clientY - rect.top) / rect.height;
      return frac * maxValue;
    };
    canvas.addEventListener("mousedown", (ev) => {
      if (this.busy) return;
      dragging = true;
      lastFrame = frameOf(ev);
      lastValue = valueOf(ev);
      if (ev.shiftKey) {
        curve.select(lastFrame, lastFrame);
      } else {
        curve.dragTo(lastFrame, lastValue);
        this.state.markEdited(kind);
      }
      this.drawCurves();
      this.setStatus("editing");
    });
    canvas.addEventListener("mousemove", (ev) => {
      if (!dragging || this.busy) return;
      const frame = frameOf(ev);
      const value = valueOf(ev);
      if (ev.shiftKey && curve.selection) {
        curve.select(curve.selection[0], frame);
      } else {
        curve.dragSpan(lastFrame, lastValue, frame, value);
        this.state.markEdited(kind);
      }
      lastFrame = frame;
      lastValue = value;
      this.drawCurves();
    });
    window.addEventListener("mouseup", () => {
      dragging = false;
    });
  }

  syncStyleFromCurves(): void {
    if (!this.style?.text) return;
    const scores = this.style.text.scores;
    this.tokenCurves.forEach((curve, t) => {
      curve.values.forEach((v, f) => {
        const row = scores[f];
        if (row) row[t] = v;
      });
    });
    this.style.text.edited = true;
  }

  async save(): Promise<void> {
    if (!this.f0Curve || this.busy) return;
    if (this.state.phase !== "dirty") return;
    const curves = this.state.startSave();
    this.busy = true;
    this.showError("");
    try {
      if (curves.includes("f0")) {
        const violations = validateF0Values(this.f0Curve.values);
        if (violations.length) {
          throw new CurveError(violations[0]!.field, violations[0]!.message);
        }
        await this.client.putF0({
          sample_rate: 22050, hop: 256, f0_hz: this.f0Curve.values,
        });
        this.f0Curve.markSaved();
      }
      if (curves.includes("style") && this.style) {
        this.syncStyleFromCurves();
        if (this.style.text) {
          const violations = validateStyleScores(this.style.text.scores, "text");
          if (violations.length) {
            throw new CurveError(violations[0]!.field, violations[0]!.message);
          }
        }
        await this.client.putStyle(this.style);
        this.tokenCurves.forEach((c) => c.markSaved());
      }
      this.state.saveOk();
      this.setStatus("saved");
    } catch (err) {
      if (err instanceof ConflictError) {
        this.state.saveConflict();
        this.showError(
          `Someone else edited this session (server at revision ${err.expected}). ` +
          `Reloading; your edits are parked — reapply or discard.`);
        await this.load();
        this.state.reloadReapply();
      } else if (err instanceof CurveError) {
        this.state.saveFailed(err.message);
        this.showError(`Invalid curve at ${err.field}: ${err.message}`);
      } else {
        this.state.saveFailed(String(err));
        this.showError(String(err));
      }
    } finally {
      this.busy = false;
      this.drawCurves();
      this.setStatus(this.state.phase);
    }
  }

  async resynthesize(): Promise<void> {
    if (this.busy) return;
    if (this.state.phase === "dirty") await this.save();
    if (this.state.phase !== "clean") return;
    this.state.startResynth();
    this.busy = true;
    this.setStatus("resynthesizing");
    try {
      const style = await this.client.resynthesize();
      this.style = style;
      const melBytes = await this.client.getMel();
      this.drawSpectrogram(melBytes);
      this.state.resynthOk();
      this.ui.audio.src = this.client.audioUrl();
      this.ui.audio.load();
      this.setStatus("resynthesized");
    } catch (err) {
      this.state.resynthFailed(String(err));
      this.showError(String(err));
    } finally {
      this.busy = false;
      this.drawCurves();
    }
  }

  applyPreset(name: string): void {
    if (!this.f0Curve || this.busy) return;
    const f0Range = this.f0Curve.selectionOrAll();
    switch (name) {
      case "shift-up":
        this.f0Curve.replace(shiftF0(this.f0Curve.values, 2, f0Range));
        this.state.markEdited("f0");
        break;
      case "shift-down":
        this.f0Curve.replace(shiftF0(this.f0Curve.values, -2, f0Range));
        this.state.markEdited("f0");
        break;
      case "flatten":
        this.f0Curve.replace(flattenF0(this.f0Curve.values, 0.2, f0Range));
        this.state.markEdited("f0");
        break;
      case "vibrato":
        this.f0Curve.replace(vibratoF0(this.f0Curve.values, 6, 0.5, f0Range));
        this.state.markEdited("f0");
        break;
      case "breath-double":
      case "crescendo": {
        if (!this.style?.text) break;
        const token = name === "breath-double" ? 0 : 1;
        const curve = this.tokenCurves[token];
        if (!curve) break;
        const range = curve.selectionOrAll();
        const before = this.tokenCurves.map((c) => c.values.slice());
        const matrix = before[0]!.map((_, f) =>
          this.tokenCurves.map((c) => c.values[f] ?? 0));
        const edited = name === "breath-double"
          ? scaleToken(matrix, token, 2.0, range)
          : rampToken(matrix, token, 0.5, 2.0, range);
        this.tokenCurves.forEach((c, t) =>
          c.replace(edited.map((row) => row[t] ?? 0)));
        this.state.markEdited("style");
        break;
      }
    }
    this.drawCurves();
    this.setStatus("edited");
  }
}

async function boot(): Promise<void> {
  const $ = (id: string) => document.getElementById(id)!;
  const ui: Ui = {
    spectrogram: $("spectrogram") as HTMLCanvasElement,
    f0Canvas: $("f0-curve") as HTMLCanvasElement,
    tokenCanvases: [0, 1, 2, 3].map(
      (i) => $(`token-${i}`) as HTMLCanvasElement),
    status: $("status"),
    errorBox: $("error"),
    audio: $("audio") as HTMLAudioElement,
  };
  const base = (document.querySelector("meta[name=api-base]") as HTMLMetaElement
               )?.content || "";
  const client = new SessionClient(base);
  const params = new URLSearchParams(window.location.search);
  const existing = params.get("session");
  if (existing) {
    client.sessionId = existing;
    await client.getMeta();
  } else {
    const meta = await client.createSession(DEMO_SCORE, 7);
    params.set("session", meta.id);
    history.replaceState(null, "", `?${params}`);
  }
  const studio = new Studio(client, ui);
  await studio.load();

  studio.attachDrag(ui.f0Canvas, studio.f0Curve!, 800, "f0");
  studio.tokenCurves.forEach((curve, i) => {
    const canvas = ui.tokenCanvases[i];
    if (canvas) studio.attachDrag(canvas, curve, 1.5, "style");
  });

  document.querySelectorAll("[data-preset]").forEach((el) => {
    el.addEventListener("click", () =>
      studio.applyPreset((el as HTMLElement).dataset.preset!));
  });
  $("save").addEventListener("click", () => void studio.save());
  $("resynth").addEventListener("click", () => void studio.resynthesize());
}

if (typeof document !== "undefined" && document.getElementById("spectrogram")) {
  void boot();
}
