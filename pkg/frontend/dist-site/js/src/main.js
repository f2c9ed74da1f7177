/** App bootstrap: session creation, socket wiring, camera, tools, badges. */
import { defaultCamera, dolly, orbit, projectPoint } from "./camera.js";
import { SessionClient } from "./client.js";
import { fullSync, deleteEdge, setConfig } from "./protocol.js";
import { Renderer, drawOverlay } from "./render.js";
import { CornerSelection, FrameSliderTool, dragVertexEdit, facesAtVertex, pickVertex } from "./tools.js";
import { ViewportModel, defectColor } from "./viewport.js";
const CUBE_OBJ = `v -1 -1 -1
v 1 -1 -1
v 1 1 -1
v -1 1 -1
v -1 -1 1
v 1 -1 1
v 1 1 1
v -1 1 1
f 1 4 3 2
f 5 6 7 8
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f 4 1 5 8
`;
function el(id) {
    const node = document.getElementById(id);
    if (!node)
        throw new Error(`missing #${id}`);
    return node;
}
async function boot() {
    const canvas = el("viewport");
    const overlay = el("overlay");
    const status = el("status");
    const toast = el("toast");
    const fileInput = el("obj-file");
    let objText = CUBE_OBJ;
    fileInput.addEventListener("change", async () => {
        const file = fileInput.files?.[0];
        if (file) {
            objText = await file.text();
            await startSession();
        }
    });
    const model = new ViewportModel();
    const camera = defaultCamera();
    const renderer = new Renderer(canvas);
    renderer.enableUintIndices();
    let client = null;
    let vp = new Float32Array(16);
    let mode = "orbit";
    let selectedVertex = null;
    let dragging = false;
    const cornerTool = new CornerSelection();
    function showToast(text) {
        toast.textContent = text;
        toast.classList.add("visible");
        setTimeout(() => toast.classList.remove("visible"), 2500);
    }
    function send(edit) {
        if (!client)
            return;
        client.send(edit);
        if (edit.type === "edit")
            model.noteEditSent();
    }
    function refreshPanels() {
        const defect = model.defects ? model.defects.ev_boundary_c1 : 0;
        const [r, g, b] = defectColor(defect);
        el("defect-swatch").style.background =
            `rgb(${(r * 255) | 0},${(g * 255) | 0},${(b * 255) | 0})`;
        el("defect-value").textContent = defect.toExponential(2);
        el("genus-badge").textContent = model.genusBadge();
        el("revision-badge").textContent = `rev ${model.revision}`;
        status.textContent = model.needsResync ? "conflict: resyncing" :
            model.pendingEdits > 0 ? `${model.pendingEdits} edit(s) in flight` : "in sync";
        if (model.mesh) {
            const frameOwner = el("frame-owner");
            const current = frameOwner.value;
            frameOwner.innerHTML = "";
            for (const f of model.mesh.faces) {
                const option = document.createElement("option");
                option.value = `face:${f.id}`;
                option.textContent = `face ${f.id} (${f.vertices.length}-gon)`;
                frameOwner.appendChild(option);
            }
            for (const v of model.mesh.vertices) {
                const option = document.createElement("option");
                option.value = `vertex:${v.id}`;
                option.textContent = `vertex ${v.id}`;
                frameOwner.appendChild(option);
            }
            if ([...frameOwner.options].some((o) => o.value === current))
                frameOwner.value = current;
            const edgeSelect = el("edge-select");
            edgeSelect.innerHTML = "";
            for (const e of model.mesh.edges) {
                const option = document.createElement("option");
                option.value = String(e.id);
                option.textContent = `edge ${e.id} (${e.vertices[0]}-${e.vertices[1]})`;
                edgeSelect.appendChild(option);
            }
            const faceSelect = el("corner-face");
            if (selectedVertex !== null) {
                faceSelect.innerHTML = "";
                for (const fid of facesAtVertex(model.mesh, selectedVertex)) {
                    const option = document.createElement("option");
                    option.value = String(fid);
                    option.textContent = `face ${fid}`;
                    faceSelect.appendChild(option);
                }
            }
        }
    }
    function frame() {
        if (model.welded)
            renderer.upload(model.welded);
        const defect = model.defects ? model.defects.ev_boundary_c1 : 0;
        const overlayOn = el("defect-overlay").checked;
        const tint = overlayOn ? defectColor(defect) : [0.62, 0.66, 0.72];
        vp = renderer.draw(camera, tint);
        overlay.width = canvas.width;
        overlay.height = canvas.height;
        drawOverlay(overlay, mode === "orbit" ? null : model.mesh, vp, selectedVertex, cornerTool.first ? cornerTool.first.face : null);
        requestAnimationFrame(frame);
    }
    async function startSession() {
        client?.close();
        model.patches.clear();
        const depth = el("depth").value;
        const resp = await fetch(`/session?depth=${depth}&resolution=5`, {
            method: "POST",
            body: objText,
        });
        if (!resp.ok) {
            showToast(`session rejected: ${await resp.text()}`);
            return;
        }
        const created = (await resp.json());
        const scheme = location.protocol === "https:" ? "wss" : "ws";
        const socket = new WebSocket(`${scheme}://${location.host}/session/${created.session_id}/ws`);
        client = new SessionClient(socket, {
            onMessage: (message, frames) => {
                model.applyServerMessage(message, frames);
                if (message.type === "error") {
                    showToast(`${message.error}: rolled back`);
                    if (model.needsResync) {
                        model.noteSyncRequested();
                        client?.send(fullSync);
                    }
                }
                refreshPanels();
            },
            onClose: () => showToast("connection closed"),
        });
        socket.addEventListener("open", () => client?.send(fullSync));
    }
    // camera + picking interactions
    let lastX = 0;
    let lastY = 0;
    canvas.parentElement.addEventListener("mousedown", (event) => {
        const e = event;
        lastX = e.offsetX;
        lastY = e.offsetY;
        if (mode === "move" && model.mesh) {
            const picked = pickVertex(model.mesh, (p) => projectPoint(vp, overlay.width, overlay.height, p), e.offsetX, e.offsetY);
            if (picked !== null) {
                selectedVertex = picked;
                dragging = true;
            }
        }
        else if (mode === "insert" && model.mesh) {
            const picked = pickVertex(model.mesh, (p) => projectPoint(vp, overlay.width, overlay.height, p), e.offsetX, e.offsetY);
            if (picked !== null) {
                selectedVertex = picked;
                refreshPanels();
            }
        }
        else {
            dragging = true;
        }
    });
    window.addEventListener("mouseup", () => {
        dragging = false;
    });
    window.addEventListener("mousemove", (event) => {
        if (!dragging)
            return;
        const e = event;
        const dx = e.movementX ?? e.clientX - lastX;
        const dy = e.movementY ?? e.clientY - lastY;
        lastX = e.clientX;
        lastY = e.clientY;
        if (mode === "orbit") {
            orbit(camera, -dx * 0.008, -dy * 0.008);
        }
        else if (mode === "move" && selectedVertex !== null && model.mesh) {
            // drag in the camera plane, scaled by distance
            const v = model.mesh.vertices.find((mv) => mv.id === selectedVertex);
            if (v) {
                const scale = camera.distance * 0.0016;
                const sinT = Math.sin(camera.theta);
                const cosT = Math.cos(camera.theta);
                const position = [
                    v.position[0] - dx * scale * sinT,
                    v.position[1] + dx * scale * cosT,
                    v.position[2] - dy * scale,
                ];
                v.position = position; // local echo for the marker only
                send(dragVertexEdit(model.nextEditRevision(), selectedVertex, position));
            }
        }
    });
    canvas.parentElement.addEventListener("wheel", (event) => {
        const e = event;
        e.preventDefault();
        dolly(camera, e.deltaY > 0 ? 1.1 : 0.9);
    }, { passive: false });
    for (const m of ["orbit", "move", "insert"]) {
        el(`mode-${m}`).addEventListener("click", () => {
            mode = m;
            cornerTool.clear();
            for (const other of ["orbit", "move", "insert"]) {
                el(`mode-${other}`).classList.toggle("active", other === m);
            }
        });
    }
    el("use-corner").addEventListener("click", () => {
        if (selectedVertex === null)
            return;
        const face = Number(el("corner-face").value);
        const edit = cornerTool.pick({ face, vertex: selectedVertex }, model.nextEditRevision());
        if (edit) {
            send(edit);
            showToast("edge inserted");
        }
        else {
            showToast("first corner staged; pick the second");
        }
    });
    el("delete-edge").addEventListener("click", () => {
        const edge = Number(el("edge-select").value);
        send(deleteEdge(model.nextEditRevision(), edge));
    });
    const sliderTool = () => {
        const [kind, id] = el("frame-owner").value.split(":");
        return new FrameSliderTool({ kind, id: Number(id) }, (edit) => send(edit), () => model.nextEditRevision());
    };
    let activeSlider = null;
    const sliderChanged = () => {
        if (!activeSlider)
            activeSlider = sliderTool();
        activeSlider.set(Number(el("frame-scale").value), Number(el("frame-rotation").value));
    };
    el("frame-scale").addEventListener("input", sliderChanged);
    el("frame-rotation").addEventListener("input", sliderChanged);
    el("frame-owner").addEventListener("change", () => {
        activeSlider = null;
        el("frame-scale").value = "1";
        el("frame-rotation").value = "0";
    });
    el("resync").addEventListener("click", () => client?.send(fullSync));
    el("depth").addEventListener("change", () => {
        send(setConfig(model.nextEditRevision(), { max_depth: Number(el("depth").value) }));
    });
    el("restart").addEventListener("click", () => startSession());
    await startSession();
    requestAnimationFrame(frame);
}
boot().catch((err) => {
    document.body.textContent = `failed to start: ${err}`;
});
