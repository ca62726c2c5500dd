/** Editor state machine.
 *
 *  The machine guarantees that a dirty edit can never be dropped silently:
 *  edits accumulate in `pending`, leave it only on a successful save, and a
 *  revision conflict parks them in `parked` until the user chooses to
 *  reapply or discard after the reload. */

export type Phase =
  | "clean"
  | "dirty"
  | "saving"
  | "resynthesizing"
  | "conflict";

export type CurveKind = "f0" | "style";

export interface EditorEvent {
  kind: "edit" | "save-start" | "save-ok" | "save-conflict"
      | "resynth-start" | "resynth-ok" | "reload-reapply" | "reload-discard"
      | "error";
  curve?: CurveKind;
}

export class EditorState {
  phase: Phase = "clean";
  pending = new Set<CurveKind>();
  parked = new Set<CurveKind>();
  lastError = "";

  /** History of (phase, event) pairs, for debugging and tests. */
  readonly trace: Array<[Phase, string]> = [];

  private move(next: Phase, event: string): void {
    this.trace.push([this.phase, event]);
    this.phase = next;
  }

  markEdited(curve: CurveKind): void {
    if (this.phase === "saving" || this.phase === "resynthesizing") {
      throw new Error(`cannot edit while ${this.phase}`);
    }
    this.pending.add(curve);
    if (this.phase === "clean") this.move("dirty", `edit:${curve}`);
    else this.trace.push([this.phase, `edit:${curve}`]);
  }

  startSave(): CurveKind[] {
    if (this.phase !== "dirty") throw new Error(`nothing to save in ${this.phase}`);
    this.move("saving", "save-start");
    return [...this.pending];
  }

  saveOk(): void {
    if (this.phase !== "saving") throw new Error(`saveOk in ${this.phase}`);
    this.pending.clear();
    this.move("clean", "save-ok");
  }

  saveConflict(): void {
    if (this.phase !== "saving") throw new Error(`saveConflict in ${this.phase}`);
    // dirty edits are parked, not dropped
    for (const c of this.pending) this.parked.add(c);
    this.pending.clear();
    this.move("conflict", "save-conflict");
  }

  saveFailed(message: string): void {
    if (this.phase !== "saving") throw new Error(`saveFailed in ${this.phase}`);
    this.lastError = message;
    // edits stay pending so the user can fix and retry
    this.move("dirty", "save-error");
  }

  /** After reloading server state, re-mark the parked curves as dirty. */
  reloadReapply(): CurveKind[] {
    if (this.phase !== "conflict") throw new Error(`reapply in ${this.phase}`);
    const parked = [...this.parked];
    this.parked.clear();
    for (const c of parked) this.pending.add(c);
    this.move(parked.length ? "dirty" : "clean", "reload-reapply");
    return parked;
  }

  reloadDiscard(): void {
    if (this.phase !== "conflict") throw new Error(`discard in ${this.phase}`);
    this.parked.clear();
    this.move("clean", "reload-discard");
  }

  startResynth(): void {
    if (this.phase !== "clean") {
      throw new Error(`resynthesize requires saved curves, state is ${this.phase}`);
    }
    this.move("resynthesizing", "resynth-start");
  }

  resynthOk(): void {
    if (this.phase !== "resynthesizing") throw new Error(`resynthOk in ${this.phase}`);
    this.move("clean", "resynth-ok");
  }

  resynthFailed(message: string): void {
    if (this.phase !== "resynthesizing") throw new Error(`resynthFailed in ${this.phase}`);
    this.lastError = message;
    this.move("clean", "resynth-error");
  }

  get hasUnsavedEdits(): boolean {
    return this.pending.size > 0 || this.parked.size > 0;
  }
}
