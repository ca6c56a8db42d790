/** Case-count map: an SVG world canvas with one circle marker per country.
 *
 * Marker radius scales with sqrt(cases) so area tracks the count. Clicking a
 * marker opens a popup with the exact cases/deaths/recovered numbers from
 * the API payload. focus(country) zooms the viewBox onto that marker.
 */

import { el } from './dom.js';
import type { MapPoint } from '../types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const WIDTH = 720;
const HEIGHT = 360;
const MIN_RADIUS = 3;
const MAX_RADIUS = 18;
const FOCUS_SPAN = 80; // viewBox side when zoomed onto a country

export function project(lat: number, lon: number): { x: number; y: number } {
  // plain equirectangular: 2 svg units per degree
  return { x: (lon + 180) * 2, y: (90 - lat) * 2 };
}

export class MapView {
  readonly element: HTMLDivElement;
  private svg: SVGSVGElement | null = null;
  private popup: HTMLDivElement | null = null;
  private positions = new Map<string, { x: number; y: number }>();

  constructor(points: MapPoint[]) {
    this.element = el('div', 'map-view');
    if (!points.length) {
      this.element.appendChild(el('p', 'map-empty', 'No map data available yet.'));
      return;
    }

    const svg = document.createElementNS(SVG_NS, 'svg');
    svg.setAttribute('class', 'map-canvas');
    svg.setAttribute('viewBox', `0 0 ${WIDTH} ${HEIGHT}`);
    const maxCases = Math.max(...points.map((p) => p.cases), 1);

    for (const point of points) {
      const { x, y } = project(point.lat, point.lon);
      this.positions.set(point.country, { x, y });
      const marker = document.createElementNS(SVG_NS, 'circle');
      marker.setAttribute('class', 'map-marker');
      marker.setAttribute('cx', String(x));
      marker.setAttribute('cy', String(y));
      const radius = MIN_RADIUS + (MAX_RADIUS - MIN_RADIUS) * Math.sqrt(point.cases / maxCases);
      marker.setAttribute('r', radius.toFixed(2));
      marker.dataset.country = point.country;
      marker.addEventListener('click', () => this.showPopup(point));
      const tooltip = document.createElementNS(SVG_NS, 'title');
      tooltip.textContent = point.country;
      marker.appendChild(tooltip);
      svg.appendChild(marker);
    }
    this.svg = svg;
    this.element.appendChild(svg);
  }

  private showPopup(point: MapPoint): void {
    this.popup?.remove();
    const popup = el('div', 'map-popup');
    popup.dataset.country = point.country;
    popup.appendChild(el('strong', 'map-popup-title', point.country));
    popup.appendChild(el('div', 'map-popup-cases', `cases: ${point.cases.toLocaleString('en-US')}`));
    popup.appendChild(el('div', 'map-popup-deaths', `deaths: ${point.deaths.toLocaleString('en-US')}`));
    popup.appendChild(
      el('div', 'map-popup-recovered', `recovered: ${point.recovered.toLocaleString('en-US')}`),
    );
    const close = el('button', 'map-popup-close', 'x');
    close.type = 'button';
    close.addEventListener('click', () => popup.remove());
    popup.appendChild(close);
    this.popup = popup;
    this.element.appendChild(popup);
  }

  /** Zoom the viewBox onto a country's marker; no-op for unknown names. */
  focus(country: string): boolean {
    const position = this.positions.get(country);
    if (!position || !this.svg) return false;
    const x = Math.max(0, Math.min(WIDTH - FOCUS_SPAN, position.x - FOCUS_SPAN / 2));
    const y = Math.max(0, Math.min(HEIGHT - FOCUS_SPAN, position.y - FOCUS_SPAN / 2));
    this.svg.setAttribute('viewBox', `${x} ${y} ${FOCUS_SPAN} ${FOCUS_SPAN}`);
    this.element.dataset.focused = country;
    return true;
  }

  markerCount(): number {
    return this.svg ? this.svg.querySelectorAll('.map-marker').length : 0;
  }
}
