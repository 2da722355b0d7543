import * as THREE from "three";
import { describe, expect, test } from "vitest";
import {
  COLOR_HEX,
  buildScene,
  countSelectionOutlines,
  countVoxels,
  isometricCamera,
  renderPreview,
  renderWorld,
  type CameraPreset,
} from "../src/scene.js";
import { applyDiff, diffSummary, type Diff, type World } from "../src/types.js";

const emptyWorld: World = { voxels: [], selection: [] };

function worldOf(
  voxels: Array<[number, number, number, string]>,
  selection: Array<[number, number, number]> = [],
): World {
  return {
    voxels: voxels.map(([row, col, height, color]) => ({ row, col, height, color })),
    selection,
  };
}

describe("renderWorld", () => {
  test("empty world renders no cubes but keeps the ground grid", () => {
    const handles = renderWorld(emptyWorld);
    expect(countVoxels(handles.scene)).toBe(0);
    expect(handles.scene.getObjectByName("ground-grid")).toBeTruthy();
  });

  test("one voxel becomes one cube at (col, height+0.5, row) in its color", () => {
    const handles = renderWorld(worldOf([[2, 3, 1, "red"]]));
    expect(countVoxels(handles.scene)).toBe(1);
    const mesh = handles.scene.getObjectByName("voxel") as THREE.Mesh;
    expect(mesh.position.x).toBe(3);
    expect(mesh.position.y).toBe(1.5);
    expect(mesh.position.z).toBe(2);
    const material = mesh.material as THREE.MeshLambertMaterial;
    expect(material.color.getHex()).toBe(COLOR_HEX["red"]);
  });

  test("selected cells get outlines even when no voxel sits there", () => {
    const handles = renderWorld(worldOf([], [[0, 0, 0], [0, 0, 5]]));
    expect(countVoxels(handles.scene)).toBe(0);
    expect(countSelectionOutlines(handles.scene)).toBe(2);
  });

  test("re-rendering into the same handles replaces content instead of stacking", () => {
    const handles = buildScene();
    renderWorld(worldOf([[0, 0, 0, "blue"], [0, 1, 0, "blue"]], [[0, 0, 0]]), handles);
    renderWorld(worldOf([[0, 0, 0, "blue"]]), handles);
    expect(countVoxels(handles.scene)).toBe(1);
    expect(countSelectionOutlines(handles.scene)).toBe(0);
  });
});

describe("candidate previews", () => {
  const base = worldOf([[0, 0, 0, "red"], [1, 1, 0, "blue"]], [[0, 0, 0]]);
  const diff: Diff = {
    added: [{ row: 0, col: 0, height: 1, color: "red" }],
    removed: [[1, 1, 0]],
    changed: [{ row: 0, col: 0, height: 0, color: "green" }],
    selection: [[0, 0, 1]],
  };

  test("applyDiff reconstructs the candidate's next world from the diff", () => {
    const next = applyDiff(base, diff);
    expect(next.voxels).toHaveLength(2);
    const colors = new Map(next.voxels.map((v) => [`${v.row},${v.col},${v.height}`, v.color]));
    expect(colors.get("0,0,1")).toBe("red");
    expect(colors.get("0,0,0")).toBe("green");
    expect(colors.has("1,1,0")).toBe(false);
    expect(next.selection).toEqual([[0, 0, 1]]);
  });

  test("renderPreview shows the resulting cubes plus removal markers", () => {
    const handles = renderPreview(base, diff);
    expect(countVoxels(handles.scene)).toBe(2);
    expect(countSelectionOutlines(handles.scene)).toBe(1);
    let removedMarkers = 0;
    handles.scene.traverse((obj) => {
      if (obj.userData.kind === "removed-marker") removedMarkers += 1;
    });
    expect(removedMarkers).toBe(1);
  });

  test("diffSummary compresses the change counts for card labels", () => {
    expect(diffSummary(diff)).toBe("+1 -1 ~1 sel 1");
  });
});

describe("isometricCamera", () => {
  test("the four presets are distinct fixed corners above the ground", () => {
    const seen = new Set<string>();
    for (const preset of [0, 1, 2, 3] as CameraPreset[]) {
      const camera = isometricCamera(preset, 1.5);
      expect(camera).toBeInstanceOf(THREE.OrthographicCamera);
      expect(camera.position.y).toBeGreaterThan(0);
      seen.add(`${Math.sign(camera.position.x)},${Math.sign(camera.position.z)}`);
    }
    expect(seen.size).toBe(4);
  });
});
