/** Status card attachment: the region's numbers exactly as the API sent them. */

import { el } from './dom.js';
import type { StatusCardAttachment } from '../types.js';

export function createStatusCard(
  data: StatusCardAttachment,
  onRegionClick?: (region: string) => void,
): HTMLDivElement {
  const card = el('div', 'status-card');
  card.dataset.region = data.region;

  const title = el('button', 'status-card-title', data.region);
  title.type = 'button';
  title.title = `Show ${data.region} on the map`;
  if (onRegionClick) {
    title.addEventListener('click', () => onRegionClick(data.region));
  }
  card.appendChild(title);

  const rows: Array<[string, string]> = [
    ['cases', data.cases.toLocaleString('en-US')],
    ['deaths', data.deaths.toLocaleString('en-US')],
    ['recovered', data.recovered.toLocaleString('en-US')],
    ['trend', data.trend],
    ['retrieved', data.retrieved],
  ];
  const list = el('dl', 'status-card-rows');
  for (const [label, value] of rows) {
    list.appendChild(el('dt', 'status-card-label', label));
    const dd = el('dd', `status-card-value status-card-${label}`, value);
    list.appendChild(dd);
  }
  card.appendChild(list);
  return card;
}
