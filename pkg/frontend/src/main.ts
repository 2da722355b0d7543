import * as THREE from "three";
import { ApiClient } from "./api.js";
import { createApp } from "./app.js";
import { isometricCamera, type CameraPreset } from "./scene.js";

// Browser entry point. Query parameters:
//   ?api=http://host:port  service base URL (default http://127.0.0.1:8000)
//   ?session=name          session to join (default "default")
//   ?user=name             user to act as (default "web")
// Press "v" to cycle the four isometric camera corners.

const params = new URLSearchParams(location.search);
const api = new ApiClient(
  params.get("api") ?? "http://127.0.0.1:8000",
  params.get("session") ?? "default",
);
const user = params.get("user") ?? "web";

const root = document.getElementById("root");
if (!root) throw new Error("missing #root element");

const app = createApp(root, api, { user });
const viewport = root.querySelector<HTMLElement>("#viewport");
if (!viewport) throw new Error("missing #viewport element");

const renderer = new THREE.WebGLRenderer({ antialias: true });
viewport.append(renderer.domElement);

let preset: CameraPreset = 0;
let camera = isometricCamera(preset, aspect());

function aspect(): number {
  return Math.max(viewport!.clientWidth, 1) / Math.max(viewport!.clientHeight, 1);
}

function resize(): void {
  renderer.setSize(viewport!.clientWidth, viewport!.clientHeight);
  camera = isometricCamera(preset, aspect());
}

window.addEventListener("resize", resize);
window.addEventListener("keydown", (event) => {
  if (event.key === "v" && document.activeElement?.tagName !== "INPUT") {
    preset = ((preset + 1) % 4) as CameraPreset;
    camera = isometricCamera(preset, aspect());
  }
});

renderer.setAnimationLoop(() => {
  renderer.render(app.handles.scene, camera);
});

resize();
void app.init();
