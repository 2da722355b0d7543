import * as THREE from "three";
import { applyDiff, type Diff, type Voxel, type World } from "./types.js";

// World axes map to three.js as: x = col, z = row, y = height (up).
// Every voxel is a unit cube whose base sits on its height layer.

export const COLOR_HEX: Record<string, number> = {
  red: 0xd64541,
  orange: 0xe98b39,
  yellow: 0xe3c445,
  green: 0x58a85c,
  blue: 0x4173c4,
  black: 0x2d2d31,
  white: 0xefeff2,
  brown: 0x8a6a48,
  gray: 0x9aa0a6,
  pink: 0xe08bbf,
};

const GRID_CELLS = 48; // ground plane size; big enough for desk-scale builds
const SELECTION_COLOR = 0xffd94d;
const REMOVED_COLOR = 0xe04a3a;

export interface SceneHandles {
  scene: THREE.Scene;
  /** cubes and outlines; cleared and repopulated on every render */
  content: THREE.Group;
  grid: THREE.GridHelper;
}

export function buildScene(): SceneHandles {
  const scene = new THREE.Scene();
  scene.background = new THREE.Color(0x14171f);

  const grid = new THREE.GridHelper(GRID_CELLS, GRID_CELLS, 0x39404f, 0x242a36);
  grid.name = "ground-grid";
  scene.add(grid);

  scene.add(new THREE.AmbientLight(0xffffff, 0.75));
  const sun = new THREE.DirectionalLight(0xffffff, 1.1);
  sun.position.set(10, 18, 6);
  scene.add(sun);

  const content = new THREE.Group();
  content.name = "world-content";
  scene.add(content);
  return { scene, content, grid };
}

function voxelMesh(v: Voxel): THREE.Mesh {
  const geometry = new THREE.BoxGeometry(0.94, 0.94, 0.94);
  const material = new THREE.MeshLambertMaterial({
    color: COLOR_HEX[v.color] ?? 0xff00ff,
  });
  const mesh = new THREE.Mesh(geometry, material);
  mesh.position.set(v.col, v.height + 0.5, v.row);
  mesh.name = "voxel";
  mesh.userData = { kind: "voxel", ...v };
  return mesh;
}

function outlineBox(
  row: number,
  col: number,
  height: number,
  color: number,
  kind: string,
): THREE.LineSegments {
  const edges = new THREE.EdgesGeometry(new THREE.BoxGeometry(1.04, 1.04, 1.04));
  const line = new THREE.LineSegments(
    edges,
    new THREE.LineBasicMaterial({ color }),
  );
  line.position.set(col, height + 0.5, row);
  line.name = kind;
  line.userData = { kind, row, col, height };
  return line;
}

/** Draw a world snapshot: one cube per voxel plus an outline around every
    selected cell. Selected cells need not hold a voxel; they still get the
    outline. Reuses `handles` when given so the caller keeps one scene. */
export function renderWorld(world: World, handles?: SceneHandles): SceneHandles {
  const h = handles ?? buildScene();
  h.content.clear();
  for (const v of world.voxels) {
    h.content.add(voxelMesh(v));
  }
  for (const [row, col, height] of world.selection) {
    h.content.add(outlineBox(row, col, height, SELECTION_COLOR, "selection-outline"));
  }
  return h;
}

/** Ghost view of a candidate: the resulting world with touched cubes tinted
    and removed cells marked by red outlines. Derived purely from the
    server-computed diff. */
export function renderPreview(base: World, diff: Diff, handles?: SceneHandles): SceneHandles {
  const result = applyDiff(base, diff);
  const h = renderWorld(result, handles);
  const touched = new Set(
    [...diff.added, ...diff.changed].map((v) => `${v.row},${v.col},${v.height}`),
  );
  h.content.traverse((obj) => {
    if (obj instanceof THREE.Mesh && obj.userData.kind === "voxel") {
      const { row, col, height } = obj.userData as Voxel;
      if (touched.has(`${row},${col},${height}`)) {
        const material = obj.material as THREE.MeshLambertMaterial;
        material.emissive = new THREE.Color(0x1f4620);
        material.transparent = true;
        material.opacity = 0.85;
      }
    }
  });
  for (const [row, col, height] of diff.removed) {
    h.content.add(outlineBox(row, col, height, REMOVED_COLOR, "removed-marker"));
  }
  return h;
}

export function countVoxels(root: THREE.Object3D): number {
  let n = 0;
  root.traverse((obj) => {
    if (obj.userData.kind === "voxel") n += 1;
  });
  return n;
}

export function countSelectionOutlines(root: THREE.Object3D): number {
  let n = 0;
  root.traverse((obj) => {
    if (obj.userData.kind === "selection-outline") n += 1;
  });
  return n;
}

export type CameraPreset = 0 | 1 | 2 | 3;

const PRESET_CORNERS = [
  [1, 1],
  [-1, 1],
  [-1, -1],
  [1, -1],
] as const;

/** Fixed isometric view from one of the four upper corners. */
export function isometricCamera(
  preset: CameraPreset,
  aspect: number,
  span = 12,
): THREE.OrthographicCamera {
  const camera = new THREE.OrthographicCamera(
    -span * aspect,
    span * aspect,
    span,
    -span,
    0.1,
    400,
  );
  const [dx, dz] = PRESET_CORNERS[preset];
  const r = 60;
  camera.position.set(dx * r, r, dz * r);
  camera.lookAt(0, 2, 0);
  camera.updateProjectionMatrix();
  return camera;
}
