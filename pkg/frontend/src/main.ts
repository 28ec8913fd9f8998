import * as THREE from "three";

import { ServiceClient } from "./api.js";
import { NABC_COLORS, NABC_LABELS } from "./colors.js";
import { buildEgoView } from "./ego.js";
import { buildRatioChart, polylinePoints } from "./ratio.js";
import { ReviewQueue } from "./review.js";
import { buildSceneModel, relaxPositions, type SceneModel } from "./scene.js";
import { ViewState } from "./state.js";
import { buildTimeline } from "./timeline.js";
import type { GraphPayload, LayoutPayload, Nabc, ViewpointsPayload } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

class ExplorerApp {
  private readonly state = new ViewState();
  private graph!: GraphPayload;
  private layout!: LayoutPayload;
  private viewpoints!: ViewpointsPayload;
  private review!: ReviewQueue;

  private scene = new THREE.Scene();
  private camera = new THREE.PerspectiveCamera(55, 1, 0.01, 100);
  private renderer = new THREE.WebGLRenderer({ antialias: true });
  private raycaster = new THREE.Raycaster();
  private nodeMeshes = new Map<string, THREE.Mesh>();
  private graphGroup = new THREE.Group();

  private canvasHost!: HTMLElement;
  private legendHost!: HTMLElement;
  private egoHost!: HTMLElement;
  private reviewHost!: HTMLElement;
  private ratioHost!: HTMLElement;
  private timelineHost!: HTMLElement;
  private statusHost!: HTMLElement;

  // orbit state: spherical angles driven by pointer drags
  private orbit = { theta: 0.5, phi: 1.2, radius: 6, dragging: false, lastX: 0, lastY: 0 };

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ServiceClient,
  ) {}

  async start(): Promise<void> {
    this.buildShell();
    const [graph, layout, viewpoints, flows, survey, ratio] = await Promise.all([
      this.client.fetchGraph(this.state.percentile, this.state.mode),
      this.client.fetchLayout(),
      this.client.fetchViewpoints(),
      this.client.fetchFlows(),
      this.client.fetchSurvey(),
      this.client.fetchRatio(this.state.flowSelector),
    ]);
    this.graph = graph;
    this.layout = layout;
    this.viewpoints = viewpoints;
    this.review = new ReviewQueue(survey, "browser");

    this.scene.add(this.graphGroup);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.8));
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(3, 5, 4);
    this.scene.add(sun);

    this.rebuildScene();
    this.drawRatio(buildRatioChart(ratio));
    this.drawTimeline(flows);
    this.drawReview();
    this.animate();
  }

  private buildShell(): void {
    this.root.replaceChildren();
    const layout = el("div", "explorer");
    this.canvasHost = el("div", "view3d");
    const side = el("div", "side");
    this.legendHost = el("div", "panel legend");
    this.egoHost = el("div", "panel ego");
    this.reviewHost = el("div", "panel review");
    this.ratioHost = el("div", "panel ratio");
    this.timelineHost = el("div", "panel timeline");
    this.statusHost = el("div", "statusbar");

    const controls = el("div", "panel controls");
    const slider = el("input") as HTMLInputElement;
    slider.type = "range";
    slider.min = "1";
    slider.max = "99";
    slider.value = String(this.state.percentile);
    const sliderLabel = el("span", "", `percentile ${this.state.percentile}`);
    slider.addEventListener("change", () => {
      this.state.setPercentile(Number(slider.value));
      sliderLabel.textContent = `percentile ${slider.value}`;
      void this.requery();
    });

    const modeButton = el("button", "", "mode: above");
    modeButton.addEventListener("click", () => {
      this.state.setMode(this.state.mode === "above" ? "below" : "above");
      modeButton.textContent = `mode: ${this.state.mode}`;
      void this.requery();
    });

    const relaxToggle = el("label", "", " smooth transitions (non-canonical)");
    const relaxBox = el("input") as HTMLInputElement;
    relaxBox.type = "checkbox";
    relaxBox.addEventListener("change", () => {
      this.state.relaxationEnabled = relaxBox.checked;
      this.rebuildScene();
    });
    relaxToggle.prepend(relaxBox);

    const kindFilters = el("div", "kind-filters");
    (Object.keys(NABC_COLORS) as Nabc[]).forEach((kind) => {
      const button = el("button", "kind", NABC_LABELS[kind]);
      button.style.borderColor = NABC_COLORS[kind];
      button.addEventListener("click", () => {
        this.state.toggleKind(kind);
        button.classList.toggle("active");
        this.rebuildScene();
      });
      kindFilters.append(button);
    });

    controls.append(slider, sliderLabel, modeButton, relaxToggle, kindFilters);
    side.append(controls, this.legendHost, this.egoHost, this.reviewHost, this.ratioHost, this.timelineHost);
    layout.append(this.canvasHost, side);
    this.root.append(layout, this.statusHost);

    this.renderer.setSize(800, 600);
    this.canvasHost.append(this.renderer.domElement);
    this.bindPointer();
  }

  private bindPointer(): void {
    const dom = this.renderer.domElement;
    dom.addEventListener("pointerdown", (event) => {
      this.orbit.dragging = true;
      this.orbit.lastX = event.clientX;
      this.orbit.lastY = event.clientY;
    });
    dom.addEventListener("pointerup", (event) => {
      if (
        Math.abs(event.clientX - this.orbit.lastX) < 3 &&
        Math.abs(event.clientY - this.orbit.lastY) < 3
      ) {
        this.pick(event);
      }
      this.orbit.dragging = false;
    });
    dom.addEventListener("pointermove", (event) => {
      if (!this.orbit.dragging) return;
      this.orbit.theta -= (event.clientX - this.orbit.lastX) * 0.005;
      this.orbit.phi = Math.min(
        Math.PI - 0.1,
        Math.max(0.1, this.orbit.phi - (event.clientY - this.orbit.lastY) * 0.005),
      );
      this.orbit.lastX = event.clientX;
      this.orbit.lastY = event.clientY;
    });
    dom.addEventListener("wheel", (event) => {
      this.orbit.radius = Math.min(30, Math.max(1, this.orbit.radius + event.deltaY * 0.01));
    });
  }

  private pick(event: PointerEvent): void {
    const bounds = this.renderer.domElement.getBoundingClientRect();
    const pointer = new THREE.Vector2(
      ((event.clientX - bounds.left) / bounds.width) * 2 - 1,
      -((event.clientY - bounds.top) / bounds.height) * 2 + 1,
    );
    this.raycaster.setFromCamera(pointer, this.camera);
    const hits = this.raycaster.intersectObjects([...this.nodeMeshes.values()]);
    if (hits.length === 0) return;
    const id = hits[0].object.userData.id as string;
    this.state.select(id, this.graph);
    this.drawEgo(id);
  }

  private async requery(): Promise<void> {
    try {
      this.graph = await this.client.fetchGraph(this.state.percentile, this.state.mode);
    } catch (error) {
      this.statusHost.textContent = `graph request failed: ${String(error)}`;
      return;
    }
    this.state.reconcileSelection(this.graph);
    if (this.state.selectedNode === null) {
      this.egoHost.replaceChildren();
    }
    this.rebuildScene();
  }

  private rebuildScene(): void {
    let model: SceneModel;
    try {
      model = buildSceneModel(this.graph, this.layout, this.state);
    } catch (error) {
      this.statusHost.textContent = String(error);
      return;
    }
    if (this.state.relaxationEnabled) {
      model = relaxPositions(model);
    }
    this.graphGroup.clear();
    this.nodeMeshes.clear();

    if (model.empty) {
      this.statusHost.textContent = "no nodes match the current filters";
    } else {
      this.statusHost.textContent = `${model.points.length} nodes, ${model.lines.length} edges`;
    }

    for (const point of model.points) {
      const mesh = new THREE.Mesh(
        new THREE.SphereGeometry(point.radius, 16, 12),
        new THREE.MeshStandardMaterial({ color: point.color }),
      );
      mesh.position.set(...point.position);
      mesh.userData.id = point.id;
      this.nodeMeshes.set(point.id, mesh);
      this.graphGroup.add(mesh);
    }

    if (model.lines.length > 0) {
      const vertices = new Float32Array(model.lines.length * 6);
      model.lines.forEach((line, i) => {
        vertices.set([...line.from, ...line.to], i * 6);
      });
      const geometry = new THREE.BufferGeometry();
      geometry.setAttribute("position", new THREE.BufferAttribute(vertices, 3));
      this.graphGroup.add(
        new THREE.LineSegments(
          geometry,
          new THREE.LineBasicMaterial({ color: 0x9aa0a6, transparent: true, opacity: 0.35 }),
        ),
      );
    }

    this.legendHost.replaceChildren(
      ...model.legend.map((entry) => {
        const row = el("div", "legend-row", ` ${entry.domain}`);
        const swatch = el("span", "swatch");
        swatch.style.background = entry.color;
        row.prepend(swatch);
        row.addEventListener("click", () => {
          this.state.toggleDomain(entry.domain);
          row.classList.toggle("muted");
          this.rebuildScene();
        });
        return row;
      }),
    );
  }

  private drawEgo(id: string): void {
    const ego = buildEgoView(this.graph, this.viewpoints, id);
    const title = el("h3", "", `${ego.center.id} [${ego.center.nabc}]`);
    const summary = el("p", "summary", ego.center.summary);
    const quote = el("blockquote", "", ego.center.quote);
    const heading = el(
      "p",
      "",
      `${ego.neighbors.length} neighbors across ${ego.domains.length} domains (${ego.domains.join(", ")})`,
    );
    const list = el("ul");
    list.append(
      ...ego.neighbors.map((n) =>
        el("li", "", `${n.id} [${n.domain}/${n.nabc}] w=${n.weight.toFixed(3)} ${n.summary}`),
      ),
    );
    this.egoHost.replaceChildren(title, summary, quote, heading, list);
  }

  private drawReview(): void {
    const item = this.review.current;
    const header = el("h3", "", "flow review");
    const indicator = el("p", "indicator", this.review.indicator());
    this.reviewHost.replaceChildren(header, indicator);
    if (this.review.offline) {
      const banner = el("p", "banner", `service unreachable, ${this.review.pendingCount} queued`);
      const retry = el("button", "", "retry");
      retry.addEventListener("click", () => void this.flushReview());
      banner.append(retry);
      this.reviewHost.append(banner);
    }
    if (this.review.conflict) {
      const banner = el("p", "banner", "item already reviewed elsewhere");
      const refresh = el("button", "", "refresh survey");
      refresh.addEventListener("click", () => void this.refreshSurvey());
      banner.append(refresh);
      this.reviewHost.append(banner);
    }
    if (!item) {
      this.reviewHost.append(el("p", "", "queue empty"));
      return;
    }
    const direction = el("p", "direction", item.direction);
    const source = el("p", "", `${item.source.viewpoint_id}: ${item.source.summary}`);
    const arrow = el("p", "arrow", `→ ${item.kind.replace("_", " ")}`);
    const target = el("p", "", `${item.target.viewpoint_id}: ${item.target.summary}`);
    const reasoning = el("p", "reasoning", item.reasoning);
    const comment = el("input") as HTMLInputElement;
    comment.placeholder = "optional comment";
    const agree = el("button", "", "agree");
    const disagree = el("button", "", "disagree");
    for (const [button, verdict] of [
      [agree, "agree"],
      [disagree, "disagree"],
    ] as const) {
      button.addEventListener("click", () => {
        this.review.recordVerdict(verdict, comment.value);
        void this.flushReview();
      });
    }
    this.reviewHost.append(direction, source, arrow, target, reasoning, comment, agree, disagree);
  }

  private async flushReview(): Promise<void> {
    const ok = await this.review.flush(this.client);
    if (ok) {
      // accepted/rejected flows change the series the service reports
      const ratio = await this.client.fetchRatio(this.state.flowSelector);
      this.drawRatio(buildRatioChart(ratio));
    }
    this.drawReview();
  }

  // Conflict recovery: pull the survey and series back from the service so
  // the queue reflects verdicts recorded by other reviewers.
  private async refreshSurvey(): Promise<void> {
    const [survey, ratio] = await Promise.all([
      this.client.fetchSurvey(),
      this.client.fetchRatio(this.state.flowSelector),
    ]);
    this.review = new ReviewQueue(survey, "browser");
    this.drawRatio(buildRatioChart(ratio));
    this.drawReview();
  }

  private drawRatio(model: ReturnType<typeof buildRatioChart>): void {
    const width = 360;
    const height = 180;
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute("points", polylinePoints(model, width, height));
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", "#1c7ed6");
    line.setAttribute("stroke-width", "2");
    svg.append(line);
    const ts = model.points.map((p) => p.t);
    const tMin = Math.min(...ts);
    const tSpan = Math.max(1, Math.max(...ts) - tMin);
    for (const dip of model.dips) {
      const marker = document.createElementNS(SVG_NS, "circle");
      marker.setAttribute("cx", String(24 + ((dip.t - tMin) / tSpan) * (width - 48)));
      marker.setAttribute(
        "cy",
        String(height - 24 - (dip.ratio / (model.yMax || 1)) * (height - 48)),
      );
      marker.setAttribute("r", "4");
      marker.setAttribute("fill", "#fa5252");
      const tip = document.createElementNS(SVG_NS, "title");
      tip.textContent = `dip at t=${dip.t} (${dip.presentation})`;
      marker.append(tip);
      svg.append(marker);
    }
    const caption = el("p", "caption", `${model.verdict} (selector: ${model.selector})`);
    this.ratioHost.replaceChildren(el("h3", "", "edge-to-node ratio"), svg, caption);
  }

  private drawTimeline(flows: Parameters<typeof buildTimeline>[0]): void {
    const model = buildTimeline(flows);
    const colWidth = 72;
    const rowHeight = 18;
    const maxRows = Math.max(1, ...model.columns.map((c) => c.nodes.length));
    const width = model.columns.length * colWidth;
    const height = (maxRows + 2) * rowHeight;
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);

    const centers = new Map<string, [number, number]>();
    model.columns.forEach((column, c) => {
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(c * colWidth + 8));
      label.setAttribute("y", "12");
      label.setAttribute("font-size", "10");
      label.textContent = `${column.presentation} ${column.domain}`;
      svg.append(label);
      for (const node of column.nodes) {
        const cx = c * colWidth + colWidth / 2;
        const cy = (node.row + 1.5) * rowHeight;
        centers.set(node.id, [cx, cy]);
        const dot = document.createElementNS(SVG_NS, "circle");
        dot.setAttribute("cx", String(cx));
        dot.setAttribute("cy", String(cy));
        dot.setAttribute("r", "5");
        dot.setAttribute("fill", node.color);
        const tip = document.createElementNS(SVG_NS, "title");
        tip.textContent = node.id;
        dot.append(tip);
        svg.append(dot);
      }
    });
    for (const arc of model.arcs) {
      const from = centers.get(arc.source);
      const to = centers.get(arc.target);
      if (!from || !to) continue;
      const path = document.createElementNS(SVG_NS, "path");
      const midY = Math.min(from[1], to[1]) - rowHeight;
      path.setAttribute("d", `M ${from[0]} ${from[1]} Q ${(from[0] + to[0]) / 2} ${midY} ${to[0]} ${to[1]}`);
      path.setAttribute("fill", "none");
      path.setAttribute("stroke", arc.sameKind ? "#495057" : "#e8590c");
      path.setAttribute("opacity", String(arc.opacity));
      if (arc.dashed) {
        path.setAttribute("stroke-dasharray", "4 3");
      }
      svg.append(path);
    }
    this.timelineHost.replaceChildren(el("h3", "", "opinion flows over time"), svg);
  }

  private animate = (): void => {
    requestAnimationFrame(this.animate);
    const { theta, phi, radius } = this.orbit;
    this.camera.position.set(
      radius * Math.sin(phi) * Math.sin(theta),
      radius * Math.cos(phi),
      radius * Math.sin(phi) * Math.cos(theta),
    );
    this.camera.lookAt(0, 0, 0);
    this.state.camera = {
      position: [this.camera.position.x, this.camera.position.y, this.camera.position.z],
      target: [0, 0, 0],
    };
    this.renderer.render(this.scene, this.camera);
  };
}

const root = document.getElementById("app");
if (root) {
  void new ExplorerApp(root, new ServiceClient("")).start();
}

export { ExplorerApp };
