/** Editing tools: corner selection for edge insertion, vertex dragging,
 * and debounced frame sliders. Tools only build edit messages; geometry
 * changes always round-trip through the server. */

import {
  CornerRef,
  EditMessage,
  MeshRecord,
  insertEdge,
  moveVertex,
  setFrame,
} from "./protocol.js";

export type Projector = (position: [number, number, number]) => [number, number] | null;

/** Nearest mesh vertex to a screen point, within a pixel radius. */
export function pickVertex(
  mesh: MeshRecord,
  project: Projector,
  x: number,
  y: number,
  radius = 12,
): number | null {
  let best: number | null = null;
  let bestDist = radius * radius;
  for (const v of mesh.vertices) {
    const p = project(v.position);
    if (!p) continue;
    const dx = p[0] - x;
    const dy = p[1] - y;
    const d = dx * dx + dy * dy;
    if (d < bestDist) {
      bestDist = d;
      best = v.id;
    }
  }
  return best;
}

/** Faces that contain a vertex, for corner disambiguation menus. */
export function facesAtVertex(mesh: MeshRecord, vertex: number): number[] {
  return mesh.faces.filter((f) => f.vertices.includes(vertex)).map((f) => f.id);
}

/** Two-click corner selection driving the insert-edge tool. */
export class CornerSelection {
  first: CornerRef | null = null;

  pick(corner: CornerRef, revision: number): EditMessage | null {
    if (this.first === null) {
      this.first = corner;
      return null;
    }
    if (this.first.face === corner.face && this.first.vertex === corner.vertex) {
      this.first = null; // clicking the same corner twice cancels
      return null;
    }
    const edit = insertEdge(revision, this.first, corner);
    this.first = null;
    return edit;
  }

  clear(): void {
    this.first = null;
  }
}

export function dragVertexEdit(revision: number, vertex: number,
                               position: [number, number, number]): EditMessage {
  return moveVertex(revision, vertex, [...position]);
}

export type Scheduler = (run: () => void, delayMs: number) => () => void;

const timerScheduler: Scheduler = (run, delay) => {
  const handle = setTimeout(run, delay);
  return () => clearTimeout(handle);
};

/** Debounces slider movement into set_frame edits so a drag emits a
 * trickle of updates instead of one per pixel. */
export class FrameSliderTool {
  private cancel: (() => void) | null = null;
  private latest: { scale: number; rotation: number } | null = null;

  constructor(
    public owner: { kind: string; id: number },
    private emit: (edit: EditMessage) => void,
    private revisionSource: () => number,
    private delayMs = 150,
    private schedule: Scheduler = timerScheduler,
  ) {}

  set(scale: number, rotation: number): void {
    this.latest = { scale, rotation };
    if (this.cancel) this.cancel();
    this.cancel = this.schedule(() => this.flush(), this.delayMs);
  }

  flush(): void {
    if (this.cancel) {
      this.cancel();
      this.cancel = null;
    }
    if (!this.latest) return;
    const { scale, rotation } = this.latest;
    this.latest = null;
    this.emit(setFrame(this.revisionSource(), this.owner, scale, rotation));
  }
}
