/** Editing tools: corner selection for edge insertion, vertex dragging,
 * and debounced frame sliders. Tools only build edit messages; geometry
 * changes always round-trip through the server. */
import { insertEdge, moveVertex, setFrame, } from "./protocol.js";
/** Nearest mesh vertex to a screen point, within a pixel radius. */
export function pickVertex(mesh, project, x, y, radius = 12) {
    let best = null;
    let bestDist = radius * radius;
    for (const v of mesh.vertices) {
        const p = project(v.position);
        if (!p)
            continue;
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
export function facesAtVertex(mesh, vertex) {
    return mesh.faces.filter((f) => f.vertices.includes(vertex)).map((f) => f.id);
}
/** Two-click corner selection driving the insert-edge tool. */
export class CornerSelection {
    first = null;
    pick(corner, revision) {
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
    clear() {
        this.first = null;
    }
}
export function dragVertexEdit(revision, vertex, position) {
    return moveVertex(revision, vertex, [...position]);
}
const timerScheduler = (run, delay) => {
    const handle = setTimeout(run, delay);
    return () => clearTimeout(handle);
};
/** Debounces slider movement into set_frame edits so a drag emits a
 * trickle of updates instead of one per pixel. */
export class FrameSliderTool {
    owner;
    emit;
    revisionSource;
    delayMs;
    schedule;
    cancel = null;
    latest = null;
    constructor(owner, emit, revisionSource, delayMs = 150, schedule = timerScheduler) {
        this.owner = owner;
        this.emit = emit;
        this.revisionSource = revisionSource;
        this.delayMs = delayMs;
        this.schedule = schedule;
    }
    set(scale, rotation) {
        this.latest = { scale, rotation };
        if (this.cancel)
            this.cancel();
        this.cancel = this.schedule(() => this.flush(), this.delayMs);
    }
    flush() {
        if (this.cancel) {
            this.cancel();
            this.cancel = null;
        }
        if (!this.latest)
            return;
        const { scale, rotation } = this.latest;
        this.latest = null;
        this.emit(setFrame(this.revisionSource(), this.owner, scale, rotation));
    }
}
