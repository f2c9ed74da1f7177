/** Client-side session state: acknowledged buffers, pending edits, rollback.
 *
 * Geometry is never mutated locally; everything rendered comes from server
 * updates, so the viewport always shows exactly the acknowledged revision.
 * Edits are optimistic only in their revision numbering: each in-flight edit
 * claims the next revision, and a conflict clears the queue and forces a
 * resync.
 */

import {
  DefectSummary,
  ErrorMessage,
  GeometryBuffer,
  MeshRecord,
  ServerMessage,
  UpdateHeader,
  decodeBuffer,
} from "./protocol.js";

export class ViewportModel {
  revision = -1;
  pendingEdits = 0;
  needsResync = false;
  patches = new Map<number, GeometryBuffer>();
  welded: GeometryBuffer | null = null;
  mesh: MeshRecord | null = null;
  defects: DefectSummary | null = null;
  stats: Record<string, number | string> = {};
  lastError: ErrorMessage | null = null;

  /** Revision to stamp on the next outgoing edit. */
  nextEditRevision(): number {
    return this.revision + this.pendingEdits;
  }

  noteEditSent(): void {
    this.pendingEdits += 1;
  }

  noteSyncRequested(): void {
    this.needsResync = false;
  }

  applyServerMessage(message: ServerMessage, frames: ArrayBuffer[]): void {
    if (message.type === "hello") {
      this.revision = message.revision;
      return;
    }
    if (message.type === "error") {
      this.lastError = message;
      if (message.error === "ConflictError") {
        this.pendingEdits = 0;
        this.needsResync = true;
        this.revision = message.revision;
      } else if (this.pendingEdits > 0) {
        this.pendingEdits -= 1; // rejected edit; server state unchanged
      }
      return;
    }
    this.applyUpdate(message, frames);
  }

  applyUpdate(header: UpdateHeader, frames: ArrayBuffer[]): void {
    if (frames.length !== header.attachments.length) {
      throw new Error(
        `expected ${header.attachments.length} attachment frames, got ${frames.length}`,
      );
    }
    header.attachments.forEach((meta, k) => {
      const buffer = decodeBuffer(frames[k], meta.vertices, meta.triangles);
      if (meta.kind === "welded") {
        this.welded = buffer;
      } else if (meta.patch !== undefined) {
        this.patches.set(meta.patch, buffer);
      }
    });
    // patches can disappear after topology edits: drop ids the server no
    // longer reports once a full set arrives
    const patchCount = header.stats["patches"];
    if (typeof patchCount === "number" && header.changed.length === patchCount) {
      const keep = new Set(header.changed);
      for (const pid of [...this.patches.keys()]) {
        if (!keep.has(pid)) this.patches.delete(pid);
      }
    }
    this.revision = header.revision;
    this.defects = header.defect_summary;
    this.stats = header.stats;
    if (header.mesh) this.mesh = header.mesh;
    if (this.pendingEdits > 0) this.pendingEdits -= 1;
  }

  genusBadge(): string {
    const genus = this.stats["genus"];
    return typeof genus === "number" ? `genus ${genus}` : "genus ?";
  }
}

/** Heat color for a tangent-mismatch value: deep blue at rounding noise,
 * through green, to red at order one. Log scale over [1e-12, 1]. */
export function defectColor(value: number): [number, number, number] {
  const clamped = Math.min(Math.max(value, 1e-12), 1.0);
  const t = (Math.log10(clamped) + 12) / 12; // 0 .. 1
  if (t < 0.5) {
    const s = t / 0.5;
    return [0.1 * s, 0.3 + 0.6 * s, 0.9 - 0.5 * s];
  }
  const s = (t - 0.5) / 0.5;
  return [0.1 + 0.9 * s, 0.9 - 0.7 * s, 0.4 - 0.3 * s];
}
